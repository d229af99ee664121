//! The reproducing kernel `K_α(x, y) = 1 + ∫_0^1 (x-t)_+^{α-1} (y-t)_+^{α-1} dt`
//! and the one-dimensional integrals needed by the Warnock-type formula.

use crate::quadrature::{gauss_legendre, graded_towards_left};
use crate::{Error, Result};

const MID_NODES: usize = 24;

/// `F_{a,c}(z) = ∫_0^z ρ^{a-1} (1+ρ)^c dρ` for `a > 0`, evaluated by a power
/// series for `z ≤ 1/2`, Gauss-Legendre on `[1/2, 2]` and an expansion in
/// `1/ρ` beyond.
#[derive(Clone, Debug)]
struct BetaTail {
    a: f64,
    c: f64,
    at_half: f64,
    at_two: f64,
}

impl BetaTail {
    fn new(a: f64, c: f64) -> Self {
        let at_half = series_small(a, c, 0.5);
        let mut t = BetaTail { a, c, at_half, at_two: 0.0 };
        t.at_two = t.middle(2.0);
        t
    }

    fn integrand(&self, r: f64) -> f64 {
        r.powf(self.a - 1.0) * (1.0 + r).powf(self.c)
    }

    fn middle(&self, z: f64) -> f64 {
        self.at_half + gauss_legendre(MID_NODES).integrate(0.5, z, |r| self.integrand(r))
    }

    fn eval(&self, z: f64) -> f64 {
        if z <= 0.0 {
            0.0
        } else if z <= 0.5 {
            series_small(self.a, self.c, z)
        } else if z <= 2.0 {
            self.middle(z)
        } else {
            self.at_two + series_large(self.a + self.c, self.c, z)
        }
    }
}

/// `z^a Σ_k C(c,k) z^k / (k + a)`.
fn series_small(a: f64, c: f64, z: f64) -> f64 {
    let mut coef = 1.0;
    let mut zk = 1.0;
    let mut sum = 0.0;
    for k in 0..200 {
        let kf = k as f64;
        let term = coef * zk / (kf + a);
        sum += term;
        if k > 2 && term.abs() <= 1e-17 * sum.abs() {
            break;
        }
        coef *= (c - kf) / (kf + 1.0);
        zk *= z;
        if coef == 0.0 {
            break;
        }
    }
    z.powf(a) * sum
}

/// `∫_2^z ρ^{e0-1} (1 + 1/ρ)^c dρ = Σ_k C(c,k) (z^e - 2^e)/e` with `e = e0 - k`.
fn series_large(e0: f64, c: f64, z: f64) -> f64 {
    let ln_ratio = (z / 2.0).ln();
    let mut coef = 1.0;
    let mut zpow = z.powf(e0);
    let mut twopow = 2f64.powf(e0);
    let mut sum = 0.0;
    for k in 0..200 {
        let kf = k as f64;
        let e = e0 - kf;
        let diff = if e.abs() < 1e-3 {
            if e == 0.0 {
                ln_ratio
            } else {
                twopow * (e * ln_ratio).exp_m1() / e
            }
        } else {
            (zpow - twopow) / e
        };
        let term = coef * diff;
        sum += term;
        if k > 2 && term.abs() <= 1e-17 * sum.abs() {
            break;
        }
        coef *= (c - kf) / (kf + 1.0);
        zpow /= z;
        twopow /= 2.0;
        if coef == 0.0 {
            break;
        }
    }
    sum
}

pub(crate) fn check_kernel_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.5 && alpha <= 1.0) {
        return Err(Error::Precondition(format!("kernel needs alpha in (1/2, 1], got {alpha}")));
    }
    Ok(())
}

fn check_unit(v: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&v) {
        return Err(Error::InvalidParameter(format!("coordinate {v} outside [0, 1]")));
    }
    Ok(())
}

/// Precomputed one-dimensional kernel integrals for a fixed `α ∈ (1/2, 1]`:
///
/// * `C(x, y) = ∫_0^{min(x,y)} (x-t)^{α-1} (y-t)^{α-1} dt`,
/// * `B(x) = α^{-1} ∫_0^x (1-t)^α (x-t)^{α-1} dt`,
/// * `A = α^{-2} / (2α + 1)`.
#[derive(Clone, Debug)]
pub struct FracKernel {
    alpha: f64,
    cross: Option<BetaTail>,
    mean: Option<BetaTail>,
}

impl FracKernel {
    pub fn new(alpha: f64) -> Result<Self> {
        check_kernel_alpha(alpha)?;
        if alpha == 1.0 {
            return Ok(FracKernel { alpha, cross: None, mean: None });
        }
        Ok(FracKernel {
            alpha,
            cross: Some(BetaTail::new(alpha, alpha - 1.0)),
            mean: Some(BetaTail::new(alpha, alpha)),
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn a(&self) -> f64 {
        1.0 / (self.alpha * self.alpha * (2.0 * self.alpha + 1.0))
    }

    pub fn b(&self, x: f64) -> f64 {
        let a = self.alpha;
        match &self.mean {
            None => x - 0.5 * x * x,
            Some(tail) => {
                let e = 1.0 - x;
                if x <= 0.0 {
                    0.0
                } else if e <= 0.0 {
                    1.0 / (2.0 * a * a)
                } else {
                    e.powf(2.0 * a) * tail.eval(x / e) / a
                }
            }
        }
    }

    pub fn c(&self, x: f64, y: f64) -> f64 {
        let (lo, hi) = if x <= y { (x, y) } else { (y, x) };
        match &self.cross {
            None => lo,
            Some(tail) => {
                let a = self.alpha;
                if lo <= 0.0 {
                    return 0.0;
                }
                let d = hi - lo;
                if d == 0.0 {
                    return lo.powf(2.0 * a - 1.0) / (2.0 * a - 1.0);
                }
                d.powf(2.0 * a - 1.0) * tail.eval(lo / d)
            }
        }
    }

    /// `K_α(x, y) = 1 + C(x, y)`.
    pub fn k(&self, x: f64, y: f64) -> f64 {
        1.0 + self.c(x, y)
    }
}

/// `K_α(x, y)` for `α ∈ (1/2, 1]` and `x, y ∈ [0, 1]`.
pub fn kernel_k(alpha: f64, x: f64, y: f64) -> Result<f64> {
    check_unit(x)?;
    check_unit(y)?;
    Ok(FracKernel::new(alpha)?.k(x, y))
}

/// `K_{α,s}(x, y) = Π_j K_α(x_j, y_j)`.
pub fn kernel_ks(alpha: f64, x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch { expected: x.len(), found: y.len() });
    }
    let k = FracKernel::new(alpha)?;
    let mut acc = 1.0;
    for (&a, &b) in x.iter().zip(y) {
        check_unit(a)?;
        check_unit(b)?;
        acc *= k.k(a, b);
    }
    Ok(acc)
}

/// `∫_0^x r^{α-1} (r + d)^e dr` by panels graded towards `r = 0`, refined
/// until two successive node counts agree within `tol`.
fn graded_pair(alpha: f64, x: f64, d: f64, e: f64, tol: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let levels = if d > 0.0 { ((x / d).log2().ceil().max(0.0) as usize + 4).min(200) } else { 200 };
    let run = |nodes: usize| {
        graded_towards_left(0.0, x, levels, nodes, alpha - 1.0, |r| r.powf(alpha - 1.0) * (r + d).powf(e))
    };
    let mut nodes = 12;
    let mut prev = run(nodes);
    loop {
        nodes *= 2;
        let next = run(nodes);
        if (next - prev).abs() <= tol * next.abs().max(1.0) || nodes >= 192 {
            return next;
        }
        prev = next;
    }
}

/// `K_α(x, y)` by direct quadrature of the defining integral; independent of
/// the series used in [`kernel_k`].
pub fn kernel_k_quadrature(alpha: f64, x: f64, y: f64, tol: f64) -> Result<f64> {
    check_kernel_alpha(alpha)?;
    check_unit(x)?;
    check_unit(y)?;
    let (lo, hi) = if x <= y { (x, y) } else { (y, x) };
    if alpha == 1.0 {
        return Ok(1.0 + lo);
    }
    if lo == hi {
        return Ok(1.0 + lo.powf(2.0 * alpha - 1.0) / (2.0 * alpha - 1.0));
    }
    Ok(1.0 + graded_pair(alpha, lo, hi - lo, alpha - 1.0, tol))
}

/// `K_{α,s}(x, y)` from [`kernel_k_quadrature`].
pub fn kernel_ks_quadrature(alpha: f64, x: &[f64], y: &[f64], tol: f64) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch { expected: x.len(), found: y.len() });
    }
    x.iter().zip(y).try_fold(1.0, |acc, (&a, &b)| Ok(acc * kernel_k_quadrature(alpha, a, b, tol)?))
}

/// `∫_0^1 K_α(x, y) dy - 1 = B(x)` by direct quadrature.
pub fn kernel_mean_quadrature(alpha: f64, x: f64, tol: f64) -> Result<f64> {
    check_kernel_alpha(alpha)?;
    check_unit(x)?;
    if alpha == 1.0 {
        return Ok(x - 0.5 * x * x);
    }
    Ok(graded_pair(alpha, x, 1.0 - x, alpha, tol) / alpha)
}
