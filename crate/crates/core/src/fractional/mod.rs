//! Spaces of fractional smoothness: Riemann-Liouville operators, synthesis of
//! functions from their mixed fractional derivatives, the anchored
//! decomposition, the reproducing kernel of the Hilbert case, and the
//! fractional discrepancy.

mod discrepancy;
mod extremal;
mod kernel;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use statrs::function::gamma::gamma;

use crate::haar::Exponent;
use crate::quadrature::{gauss_jacobi, gauss_legendre, graded_towards_left, right_singular};
use crate::{Error, Result};

pub use discrepancy::{
    delta_alpha, frac_discrepancy, frac_discrepancy_points, l2_star_discrepancy, nonempty_subsets,
    rkhs_worst_case_error, DiscrepancyMethod, DiscrepancyResult,
};
pub use extremal::{extremal_function, ExtremalGrid, ExtremalResult};
pub use kernel::{
    kernel_k, kernel_k_quadrature, kernel_ks, kernel_ks_quadrature, kernel_mean_quadrature, FracKernel,
};

pub type DensityFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// A density `f̃_u` on `[0, 1]^u`.
#[derive(Clone)]
pub enum Density {
    Callable(DensityFn),
    Mesh(MeshDensity),
}

impl fmt::Debug for Density {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Density::Callable(_) => f.write_str("Density::Callable(..)"),
            Density::Mesh(m) => f.debug_tuple("Density::Mesh").field(m).finish(),
        }
    }
}

impl Density {
    pub fn callable<F: Fn(&[f64]) -> f64 + Send + Sync + 'static>(f: F) -> Self {
        Density::Callable(Arc::new(f))
    }

    pub fn constant(c: f64) -> Self {
        Density::callable(move |_| c)
    }

    pub fn eval(&self, t: &[f64]) -> f64 {
        match self {
            Density::Callable(f) => f(t),
            Density::Mesh(m) => m.value_at(t),
        }
    }

    fn scaled(&self, lambda: f64) -> Density {
        match self {
            Density::Callable(f) => {
                let f = f.clone();
                Density::callable(move |t| lambda * f(t))
            }
            Density::Mesh(m) => Density::Mesh(MeshDensity {
                breaks: m.breaks.clone(),
                values: m.values.iter().map(|v| lambda * v).collect(),
            }),
        }
    }
}

/// A piecewise constant density on a tensor mesh of `[0, 1]^d`. Values are
/// stored row-major with the first axis most significant.
#[derive(Clone, Debug, PartialEq)]
pub struct MeshDensity {
    breaks: Vec<Vec<f64>>,
    values: Vec<f64>,
}

impl MeshDensity {
    /// `breaks[a]` must increase strictly from 0 to 1.
    pub fn new(breaks: Vec<Vec<f64>>, values: Vec<f64>) -> Result<Self> {
        let mut cells = 1usize;
        for b in &breaks {
            if b.len() < 2 || b[0] != 0.0 || *b.last().unwrap() != 1.0 || b.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::InvalidParameter("mesh breaks must increase strictly from 0 to 1".into()));
            }
            cells *= b.len() - 1;
        }
        if values.len() != cells {
            return Err(Error::DimensionMismatch { expected: cells, found: values.len() });
        }
        Ok(MeshDensity { breaks, values })
    }

    pub fn breaks(&self) -> &[Vec<f64>] {
        &self.breaks
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    fn cell_count(&self, axis: usize) -> usize {
        self.breaks[axis].len() - 1
    }

    pub fn value_at(&self, t: &[f64]) -> f64 {
        let mut flat = 0usize;
        for (a, &x) in t.iter().enumerate() {
            let b = &self.breaks[a];
            let c = b.partition_point(|&v| v <= x).saturating_sub(1).min(self.cell_count(a) - 1);
            flat = flat * self.cell_count(a) + c;
        }
        self.values[flat]
    }

    fn for_each_cell(&self, mut f: impl FnMut(&[(f64, f64)], f64)) {
        let d = self.breaks.len();
        let mut cell = vec![(0.0, 0.0); d];
        for (flat, &v) in self.values.iter().enumerate() {
            let mut r = flat;
            for a in (0..d).rev() {
                let n = self.cell_count(a);
                let c = r % n;
                r /= n;
                cell[a] = (self.breaks[a][c], self.breaks[a][c + 1]);
            }
            f(&cell, v);
        }
    }

    /// `‖·‖_{L_p([0,1]^d)}`, exact.
    pub fn lp_norm(&self, p: Exponent) -> f64 {
        match p {
            Exponent::Infinite => self.values.iter().fold(0.0, |m, v| m.max(v.abs())),
            Exponent::Finite(pp) => {
                let mut acc = 0.0;
                self.for_each_cell(|cell, v| {
                    acc += v.abs().powf(pp) * cell.iter().map(|(lo, hi)| hi - lo).product::<f64>();
                });
                acc.powf(1.0 / pp)
            }
        }
    }
}

/// `f = Φ((f̃_u)_u) = Σ_u Γ(α)^{-|u|} ∫ f̃_u(t_u) Π_{j∈u} (x_j - t_j)_+^{α-1} dt_u`.
///
/// Subsets without a density have `f̃_u = 0`; `f̃_∅` is the scalar `constant`.
#[derive(Clone, Debug)]
pub struct FracFunction {
    alpha: f64,
    dim: usize,
    constant: f64,
    densities: BTreeMap<Vec<usize>, Density>,
}

impl FracFunction {
    pub fn new(alpha: f64, dim: usize) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::Precondition(format!("alpha = {alpha} outside (0, 1]")));
        }
        if dim == 0 {
            return Err(Error::InvalidParameter("dimension must be positive".into()));
        }
        Ok(FracFunction { alpha, dim, constant: 0.0, densities: BTreeMap::new() })
    }

    pub fn with_constant(mut self, c: f64) -> Self {
        self.constant = c;
        self
    }

    /// Sets `f̃_u`; `u` is a strictly increasing list of 0-based coordinates.
    pub fn with_density(mut self, u: Vec<usize>, density: Density) -> Result<Self> {
        if u.is_empty() || u.windows(2).any(|w| w[0] >= w[1]) || u.iter().any(|&j| j >= self.dim) {
            return Err(Error::InvalidIndex(format!("subset {u:?} for dimension {}", self.dim)));
        }
        if let Density::Mesh(m) = &density {
            if m.breaks.len() != u.len() {
                return Err(Error::DimensionMismatch { expected: u.len(), found: m.breaks.len() });
            }
        }
        self.densities.insert(u, density);
        Ok(self)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn constant(&self) -> f64 {
        self.constant
    }

    pub fn density(&self, u: &[usize]) -> Option<&Density> {
        self.densities.get(u)
    }

    pub fn densities(&self) -> impl Iterator<Item = (&Vec<usize>, &Density)> {
        self.densities.iter()
    }

    pub fn scaled(&self, lambda: f64) -> Self {
        FracFunction {
            alpha: self.alpha,
            dim: self.dim,
            constant: lambda * self.constant,
            densities: self.densities.iter().map(|(u, d)| (u.clone(), d.scaled(lambda))).collect(),
        }
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::Precondition(format!("alpha = {alpha} outside (0, 1]")));
    }
    Ok(())
}

const MAX_NODES: usize = 1024;

/// `(1/Γ(α)) ∫_0^x f̃(t) (x-t)^{α-1} dt` by Gauss-Jacobi with the kernel as
/// weight, doubling the node count from 64 until successive values agree
/// within `tol`.
pub fn frac_integral<F: Fn(f64) -> f64>(ftilde: F, alpha: f64, x: f64, tol: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::InvalidParameter(format!("x = {x} outside [0, 1]")));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    let mut n = 64;
    let mut prev = right_singular(0.0, x, alpha - 1.0, n, &ftilde);
    while n < MAX_NODES {
        n *= 2;
        let next = right_singular(0.0, x, alpha - 1.0, n, &ftilde);
        if (next - prev).abs() <= tol {
            prev = next;
            break;
        }
        prev = next;
    }
    Ok(prev / gamma(alpha))
}

fn rl_check(alpha: f64, x: f64, h: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Precondition(format!("derivative order {alpha} outside (0, 1)")));
    }
    if !(h > 0.0) || x - h <= 0.0 || x + h > 1.0 {
        return Err(Error::Precondition(format!("stencil x = {x} +/- {h} leaves (0, 1]")));
    }
    Ok(())
}

/// `(1/Γ(1-α)) ∫_0^y (f(t) - c) (y-t)^{-α} dt`.
fn rl_antiderivative<F: Fn(f64) -> f64>(f: &F, c: f64, alpha: f64, y: f64) -> f64 {
    let mid = 0.5 * y;
    let left = graded_towards_left(0.0, mid, 30, 16, 0.0, |t| (f(t) - c) * (y - t).powf(-alpha));
    let right = right_singular(mid, y, -alpha, 48, |t| f(t) - c);
    (left + right) / gamma(1.0 - alpha)
}

/// Anchored Riemann-Liouville derivative `D^α f(x) = d^α (f - f(0)) / dx^α`
/// for `α ∈ (0, 1)`: the fractional integral of order `1 - α` followed by a
/// central difference with step `h`.
pub fn rl_derivative<F: Fn(f64) -> f64>(f: F, alpha: f64, x: f64, h: f64) -> Result<f64> {
    rl_check(alpha, x, h)?;
    let c = f(0.0);
    Ok((rl_antiderivative(&f, c, alpha, x + h) - rl_antiderivative(&f, c, alpha, x - h)) / (2.0 * h))
}

/// The Riemann-Liouville derivative without subtracting `f(0)`.
pub fn rl_derivative_unanchored<F: Fn(f64) -> f64>(f: F, alpha: f64, x: f64, h: f64) -> Result<f64> {
    rl_check(alpha, x, h)?;
    Ok((rl_antiderivative(&f, 0.0, alpha, x + h) - rl_antiderivative(&f, 0.0, alpha, x - h)) / (2.0 * h))
}

/// `∫_{Π[0,x_j]} g(t) Π (x_j - t_j)^{α-1} dt` by a tensor Gauss-Jacobi rule.
fn tensor_jacobi(g: &dyn Fn(&[f64]) -> f64, alpha: f64, x: &[f64], n: usize) -> f64 {
    let rule = gauss_jacobi(n, alpha - 1.0, 0.0);
    let axes: Vec<Vec<(f64, f64)>> = x.iter().map(|&xj| rule.mapped(0.0, xj).collect()).collect();
    let d = x.len();
    let total = n.pow(d as u32);
    let mut t = vec![0.0; d];
    let mut acc = 0.0;
    for flat in 0..total {
        let mut r = flat;
        let mut w = 1.0;
        for a in (0..d).rev() {
            let (ta, wa) = axes[a][r % n];
            r /= n;
            t[a] = ta;
            w *= wa;
        }
        acc += w * g(&t);
    }
    acc
}

/// `∫_{Π[0,x_j]} m(t) Π (x_j - t_j)^{α-1} dt` for a piecewise constant `m`.
fn mesh_jacobi(m: &MeshDensity, alpha: f64, x: &[f64]) -> f64 {
    let mut acc = 0.0;
    m.for_each_cell(|cell, v| {
        if v == 0.0 {
            return;
        }
        let mut w = 1.0;
        for (&(lo, hi), &xj) in cell.iter().zip(x) {
            w *= ((xj - lo).max(0.0).powf(alpha) - (xj - hi).max(0.0).powf(alpha)) / alpha;
            if w == 0.0 {
                return;
            }
        }
        acc += v * w;
    });
    acc
}

/// Point value of `Φ((f̃_u)_u)` at `x`. Callable densities are integrated by
/// tensor Gauss-Jacobi rules, doubling the node count until successive
/// values agree within `tol`; mesh densities are integrated exactly.
pub fn phi_synthesize(f: &FracFunction, x: &[f64], tol: f64) -> Result<f64> {
    if x.len() != f.dim {
        return Err(Error::DimensionMismatch { expected: f.dim, found: x.len() });
    }
    if let Some(v) = x.iter().find(|v| !(0.0..=1.0).contains(*v)) {
        return Err(Error::InvalidParameter(format!("coordinate {v} outside [0, 1]")));
    }
    let alpha = f.alpha;
    let mut total = f.constant;
    for (u, density) in &f.densities {
        let xu: Vec<f64> = u.iter().map(|&j| x[j]).collect();
        if xu.contains(&0.0) {
            continue;
        }
        let integral = match density {
            Density::Mesh(m) => mesh_jacobi(m, alpha, &xu),
            Density::Callable(g) => {
                let cap = match u.len() {
                    1 => MAX_NODES,
                    2 => 256,
                    _ => 64,
                };
                let mut n = 16;
                let mut prev = tensor_jacobi(g.as_ref(), alpha, &xu, n);
                while n < cap {
                    n *= 2;
                    let next = tensor_jacobi(g.as_ref(), alpha, &xu, n);
                    let done = (next - prev).abs() <= tol;
                    prev = next;
                    if done {
                        break;
                    }
                }
                prev
            }
        };
        total += integral / gamma(alpha).powi(u.len() as i32);
    }
    Ok(total)
}

/// `f_{⊢,u}(x_u) = Σ_{v⊆u} (-1)^{|u∖v|} f(x_v, 0)`: the term of the anchored
/// decomposition belonging to `u`, evaluated at `x` (coordinates outside `u`
/// are ignored).
pub fn anchored_term<F: Fn(&[f64]) -> f64>(f: F, u: &[usize], x: &[f64]) -> Result<f64> {
    if let Some(&j) = u.iter().find(|&&j| j >= x.len()) {
        return Err(Error::InvalidIndex(format!("coordinate {j} outside dimension {}", x.len())));
    }
    let mut acc = 0.0;
    let mut y = vec![0.0; x.len()];
    for mask in 0u32..(1 << u.len()) {
        y.iter_mut().for_each(|v| *v = 0.0);
        for (b, &j) in u.iter().enumerate() {
            if mask >> b & 1 == 1 {
                y[j] = x[j];
            }
        }
        let sign = if (u.len() - mask.count_ones() as usize).is_multiple_of(2) { 1.0 } else { -1.0 };
        acc += sign * f(&y);
    }
    Ok(acc)
}

/// `‖f̃‖_{L_p([0,1]^d)}` for a callable density by tensor Gauss-Legendre on
/// a uniform panel grid, refined until successive values agree within `tol`.
fn callable_lp_norm(g: &dyn Fn(&[f64]) -> f64, d: usize, p: Exponent, tol: f64) -> f64 {
    let gl = gauss_legendre(6);
    let eval = |panels: usize| -> f64 {
        let mut axis = Vec::new();
        for c in 0..panels {
            let lo = c as f64 / panels as f64;
            axis.extend(gl.mapped(lo, lo + 1.0 / panels as f64));
        }
        let n = axis.len();
        let mut t = vec![0.0; d];
        let mut acc = 0.0f64;
        for flat in 0..n.pow(d as u32) {
            let mut r = flat;
            let mut w = 1.0;
            for a in (0..d).rev() {
                let (ta, wa) = axis[r % n];
                r /= n;
                t[a] = ta;
                w *= wa;
            }
            let v = g(&t).abs();
            acc = match p {
                Exponent::Infinite => acc.max(v),
                Exponent::Finite(pp) => acc + w * v.powf(pp),
            };
        }
        match p {
            Exponent::Infinite => acc,
            Exponent::Finite(pp) => acc.powf(1.0 / pp),
        }
    };
    let cap = match d {
        1 => 1 << 12,
        2 => 64,
        _ => 8,
    };
    let mut panels = 1;
    let mut prev = eval(panels);
    while panels < cap {
        panels *= 2;
        let next = eval(panels);
        let done = (next - prev).abs() <= tol * next.abs().max(1.0);
        prev = next;
        if done {
            break;
        }
    }
    prev
}

fn density_norms(f: &FracFunction, p: Exponent, tol: f64) -> Vec<f64> {
    let g = gamma(f.alpha);
    f.densities
        .iter()
        .map(|(u, d)| {
            let norm = match d {
                Density::Mesh(m) => m.lp_norm(p),
                Density::Callable(c) => callable_lp_norm(c.as_ref(), u.len(), p, tol),
            };
            norm / g.powi(u.len() as i32)
        })
        .collect()
}

/// `V_{α,s,p,q}(f) = (Σ_{u≠∅} Γ(α)^{-q|u|} ‖f̃_u‖_p^q)^{1/q}`.
pub fn seminorm_v(f: &FracFunction, p: Exponent, q: Exponent, tol: f64) -> f64 {
    q.norm(&density_norms(f, p, tol))
}

/// `‖f‖_{α,s,p,q} = (|f̃_∅|^q + V_{α,s,p,q}(f)^q)^{1/q}`.
pub fn full_norm(f: &FracFunction, p: Exponent, q: Exponent, tol: f64) -> f64 {
    let mut terms = density_norms(f, p, tol);
    terms.push(f.constant);
    q.norm(&terms)
}

#[cfg(test)]
mod tests;
