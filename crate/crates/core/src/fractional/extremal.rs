//! Functions attaining the Koksma-Hlawka type bound up to a mesh-dependent
//! factor.

use std::sync::Arc;

use statrs::function::gamma::gamma;

use super::discrepancy::{frac_discrepancy_points, nonempty_subsets, DiscrepancyMethod};
use super::{Density, FracFunction, MeshDensity};
use crate::haar::Exponent;
use crate::nets::PointSet;
use crate::{par, Error, Result};

/// Per-axis mesh: `panels` uniform cells, every point coordinate, and the
/// graded points `x - 2^{-g/per_octave}` for `g = 1..=octaves·per_octave`
/// left of each coordinate `x`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ExtremalGrid {
    pub panels: usize,
    pub octaves: u32,
    pub per_octave: u32,
}

impl ExtremalGrid {
    /// The `l`-th member of a nested family of meshes.
    pub fn level(l: u32) -> Self {
        ExtremalGrid { panels: 8 << l, octaves: 6 + 3 * l, per_octave: 1 << l }
    }

    /// The member of the [`level`](Self::level) family with `panels` uniform
    /// panels; the grading follows the largest level `l` with `8·2^l ≤ panels`.
    pub fn from_panels(panels: usize) -> Self {
        let l = (panels.max(8) / 8).ilog2();
        ExtremalGrid { panels: panels.max(1), octaves: 6 + 3 * l, per_octave: 1 << l }
    }

    fn breaks(&self, coords: &[f64]) -> Vec<f64> {
        let mut b: Vec<f64> = (0..=self.panels).map(|i| i as f64 / self.panels as f64).collect();
        let steps = self.octaves * self.per_octave;
        for &x in coords {
            b.push(x);
            for g in 1..=steps {
                let v = x - 2f64.powf(-(g as f64) / self.per_octave as f64);
                if v > 0.0 {
                    b.push(v);
                }
            }
        }
        b.sort_by(f64::total_cmp);
        b.dedup();
        b
    }
}

#[derive(Clone, Debug)]
pub struct ExtremalResult {
    pub function: FracFunction,
    /// `|I_s(f) - Q_P(f)| / (D* ‖f‖)`.
    pub ratio: f64,
    pub discrepancy: f64,
    pub integration_error: f64,
    pub norm: f64,
}

/// Closed-form integrals of the factors of `Δ_α` over mesh cells of one axis.
struct AxisData {
    breaks: Vec<f64>,
    smooth: Vec<f64>,
    /// `sing[n][c] = ∫_cell (x_n - t)_+^{α-1} dt`.
    sing: Vec<Vec<f64>>,
}

impl AxisData {
    fn new(breaks: Vec<f64>, coords: &[f64], alpha: f64) -> Self {
        let smooth = breaks
            .windows(2)
            .map(|w| ((1.0 - w[0]).powf(alpha + 1.0) - (1.0 - w[1]).powf(alpha + 1.0)) / (alpha * (alpha + 1.0)))
            .collect();
        let sing = coords
            .iter()
            .map(|&x| {
                breaks
                    .windows(2)
                    .map(|w| ((x - w[0]).max(0.0).powf(alpha) - (x - w[1]).max(0.0).powf(alpha)) / alpha)
                    .collect()
            })
            .collect();
        AxisData { breaks, smooth, sing }
    }

    fn cells(&self) -> usize {
        self.breaks.len() - 1
    }

    fn width(&self, c: usize) -> f64 {
        self.breaks[c + 1] - self.breaks[c]
    }

    fn locate(&self, t: f64) -> usize {
        self.breaks.partition_point(|&v| v <= t).saturating_sub(1).min(self.cells() - 1)
    }

    /// `G(σ, σ') = Σ_c I_σ(c) I_σ'(c) / |c|` over sources `σ ∈ {smooth, points}`.
    fn gram(&self) -> Vec<Vec<f64>> {
        let sources: Vec<&Vec<f64>> = std::iter::once(&self.smooth).chain(self.sing.iter()).collect();
        let inv_w: Vec<f64> = (0..self.cells()).map(|c| 1.0 / self.width(c)).collect();
        par::map_range(sources.len(), |a| {
            (0..sources.len())
                .map(|b| {
                    let terms: Vec<f64> =
                        sources[a].iter().zip(sources[b]).zip(&inv_w).map(|((x, y), w)| x * y * w).collect();
                    par::pairwise_sum(&terms)
                })
                .collect()
        })
    }
}

/// `∫_cell Δ_α(·, u, P)` from the per-axis tables.
fn cell_integral(axes: &[&AxisData], cell: &[usize], inv_n: f64) -> f64 {
    let smooth: f64 = axes.iter().zip(cell).map(|(a, &c)| a.smooth[c]).product();
    let n = axes[0].sing.len();
    let mut cnt = 0.0;
    for pt in 0..n {
        let mut prod = 1.0;
        for (a, &c) in axes.iter().zip(cell) {
            prod *= a.sing[pt][c];
            if prod == 0.0 {
                break;
            }
        }
        cnt += prod;
    }
    smooth - cnt * inv_n
}

/// Cell budget for the nonlinear construction (`p ≠ 2`).
const CELL_BUDGET: usize = 100_000_000;

/// Largest mesh stored explicitly in the returned function.
const MESH_LIMIT: usize = 1 << 22;

/// Builds `f̃_u = Γ(α)^{|u|} c_u sign(Δ̄_u) |Δ̄_u|^{p'-1}`, where `Δ̄_u` is the
/// mesh average of `Δ_α(·, u, P)` and `c_u = ‖Δ_u‖_{p'}^{q'-p'}`, and reports
/// how close `f` comes to equality in `|I(f) - Q(f)| ≤ D*_{α,s,p',q'}(P) ‖f‖`.
pub fn extremal_function(
    p: &PointSet,
    alpha: f64,
    pe: Exponent,
    qe: Exponent,
    grid: ExtremalGrid,
) -> Result<ExtremalResult> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::Precondition(format!("alpha = {alpha} outside (0, 1]")));
    }
    let pp = match pe {
        Exponent::Finite(v) if v * alpha > 1.0 && v > 1.0 => v,
        _ => return Err(Error::Precondition(format!("p = {pe} outside (1/alpha, inf) for alpha = {alpha}"))),
    };
    if grid.panels == 0 || grid.per_octave == 0 {
        return Err(Error::InvalidParameter("mesh needs at least one panel and one step per octave".into()));
    }
    let points = p.to_f64();
    let s = p.dim();
    let n = points.len();
    let inv_n = 1.0 / n as f64;
    let p_dual = pe.conjugate();
    let q_dual = qe.conjugate();
    let pd = p_dual.as_f64();
    let hilbert = pp == 2.0 && qe == Exponent::Finite(2.0) && alpha > 0.5;
    let disc = if hilbert {
        frac_discrepancy_points(&points, alpha, p_dual, q_dual, DiscrepancyMethod::Warnock, 0.0)?
    } else {
        frac_discrepancy_points(&points, alpha, p_dual, q_dual, DiscrepancyMethod::TensorQuad, 1e-6)?
    };
    let axes: Vec<Arc<AxisData>> = (0..s)
        .map(|j| {
            let coords: Vec<f64> = points.iter().map(|x| x[j]).collect();
            Arc::new(AxisData::new(grid.breaks(&coords), &coords, alpha))
        })
        .collect();
    let grams: Option<Vec<Vec<Vec<f64>>>> = hilbert.then(|| axes.iter().map(|a| a.gram()).collect());
    let subsets = nonempty_subsets(s);
    let g = gamma(alpha);
    let mut function = FracFunction::new(alpha, s)?;
    let mut pairings = Vec::with_capacity(subsets.len());
    let mut h_norms = Vec::with_capacity(subsets.len());
    for (ui, u) in subsets.iter().enumerate() {
        let (scale, pairing, h_norm) = match &grams {
            Some(grams) => {
                // ‖PΔ_u‖² = Σ_{σ,σ'} coef_σ coef_σ' Π_j G_j(σ, σ')
                let coef = |a: usize| if a == 0 { 1.0 } else { -inv_n };
                let rows = par::map_range(n + 1, |a| {
                    let terms: Vec<f64> = (0..=n)
                        .map(|b| coef(a) * coef(b) * u.iter().map(|&j| grams[j][a][b]).product::<f64>())
                        .collect();
                    par::pairwise_sum(&terms)
                });
                let sq = par::pairwise_sum(&rows).max(0.0);
                (1.0, sq, sq.sqrt())
            }
            None => {
                let delta_norm = match &disc.per_u {
                    Some(per) => per[ui].1.powf(1.0 / pd),
                    None => unreachable!("tensor quadrature reports per-subset integrals"),
                };
                let scale = if delta_norm > 0.0 { delta_norm.powf(q_dual.as_f64() - pd) } else { 0.0 };
                let (pairing, hp) = nonlinear_sums(&axes, u, inv_n, scale, pd, pp)?;
                (scale, pairing, hp.powf(1.0 / pp))
            }
        };
        pairings.push(pairing);
        h_norms.push(h_norm);
        let u_axes: Vec<Arc<AxisData>> = u.iter().map(|&j| axes[j].clone()).collect();
        let gu = g.powi(u.len() as i32);
        let power = if hilbert { 1.0 } else { pd - 1.0 };
        let value = move |avg: f64| gu * scale * avg.signum() * avg.abs().powf(power);
        let cells: usize = u_axes.iter().map(|a| a.cells()).product();
        let density = if cells <= MESH_LIMIT {
            let refs: Vec<&AxisData> = u_axes.iter().map(|a| a.as_ref()).collect();
            let values = for_each_cell(&refs, inv_n, |avg, _, _| value(avg));
            let breaks = u_axes.iter().map(|a| a.breaks.clone()).collect();
            Density::Mesh(MeshDensity::new(breaks, values)?)
        } else {
            Density::callable(move |t: &[f64]| {
                let cell: Vec<usize> = u_axes.iter().zip(t).map(|(a, &x)| a.locate(x)).collect();
                let vol: f64 = u_axes.iter().zip(&cell).map(|(a, &c)| a.width(c)).product();
                let refs: Vec<&AxisData> = u_axes.iter().map(|a| a.as_ref()).collect();
                value(cell_integral(&refs, &cell, inv_n) / vol)
            })
        };
        function = function.with_density(u.clone(), density)?;
    }
    let integration_error: f64 = pairings.iter().sum();
    let norm = qe.norm(&h_norms);
    let ratio = if disc.value > 0.0 && norm > 0.0 { integration_error.abs() / (disc.value * norm) } else { 0.0 };
    Ok(ExtremalResult { function, ratio, discrepancy: disc.value, integration_error, norm })
}

/// Applies `f(average, integral, volume)` to every cell of the tensor mesh,
/// row-major with the first axis most significant.
fn for_each_cell<R: Send>(axes: &[&AxisData], inv_n: f64, f: impl Fn(f64, f64, f64) -> R + Sync + Send) -> Vec<R> {
    let counts: Vec<usize> = axes.iter().map(|a| a.cells()).collect();
    let rest: usize = counts[1..].iter().product();
    let rows = par::map_range(counts[0], |c0| {
        let mut cell = vec![0usize; axes.len()];
        cell[0] = c0;
        let mut out = Vec::with_capacity(rest);
        for flat in 0..rest {
            let mut r = flat;
            for a in (1..axes.len()).rev() {
                cell[a] = r % counts[a];
                r /= counts[a];
            }
            let vol: f64 = axes.iter().zip(&cell).map(|(a, &c)| a.width(c)).product();
            let integral = cell_integral(axes, &cell, inv_n);
            out.push(f(integral / vol, integral, vol));
        }
        out
    });
    rows.into_iter().flatten().collect()
}

/// `(Σ_c h(c) ∫_c Δ, Σ_c |h(c)|^p |c|)` for `h = scale · sign(Δ̄)|Δ̄|^{p'-1}`.
fn nonlinear_sums(axes: &[Arc<AxisData>], u: &[usize], inv_n: f64, scale: f64, pd: f64, pp: f64) -> Result<(f64, f64)> {
    let u_axes: Vec<&AxisData> = u.iter().map(|&j| axes[j].as_ref()).collect();
    let total = u_axes.iter().try_fold(1usize, |acc, a| acc.checked_mul(a.cells())).unwrap_or(usize::MAX);
    if total.saturating_mul(u_axes[0].sing.len().max(1)) > CELL_BUDGET {
        return Err(Error::Budget(format!("{total} mesh cells exceed the extremal-function budget")));
    }
    let terms = for_each_cell(&u_axes, inv_n, |avg, integral, vol| {
        let h = scale * avg.signum() * avg.abs().powf(pd - 1.0);
        (h * integral, h.abs().powf(pp) * vol)
    });
    let pairing: Vec<f64> = terms.iter().map(|v| v.0).collect();
    let hp: Vec<f64> = terms.iter().map(|v| v.1).collect();
    Ok((par::pairwise_sum(&pairing), par::pairwise_sum(&hp)))
}
