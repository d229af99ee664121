//! Gauss-Jacobi and Gauss-Legendre rules (Golub-Welsch) with a process-wide cache.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::{DMatrix, SymmetricEigen};
use statrs::function::gamma::ln_gamma;

/// Nodes and weights on `[-1, 1]` for the weight `(1-x)^a (1+x)^b`.
#[derive(Debug, Clone)]
pub struct Rule {
    pub a: f64,
    pub b: f64,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

type Key = (usize, u64, u64);

fn cache() -> &'static Mutex<HashMap<Key, Arc<Rule>>> {
    static CACHE: OnceLock<Mutex<HashMap<Key, Arc<Rule>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Cached `n`-point Gauss-Jacobi rule for `(1-x)^a (1+x)^b`, `a, b > -1`.
pub fn gauss_jacobi(n: usize, a: f64, b: f64) -> Arc<Rule> {
    assert!(n >= 1, "quadrature rule needs at least one node");
    assert!(a > -1.0 && b > -1.0, "Jacobi exponents must exceed -1");
    let key = (n, a.to_bits(), b.to_bits());
    if let Some(rule) = cache().lock().expect("quadrature cache poisoned").get(&key) {
        return rule.clone();
    }
    let rule = Arc::new(golub_welsch(n, a, b));
    cache().lock().expect("quadrature cache poisoned").insert(key, rule.clone());
    rule
}

pub fn gauss_legendre(n: usize) -> Arc<Rule> {
    gauss_jacobi(n, 0.0, 0.0)
}

fn golub_welsch(n: usize, a: f64, b: f64) -> Rule {
    let ab = a + b;
    let mut jac = DMatrix::<f64>::zeros(n, n);
    for k in 0..n {
        let kf = k as f64;
        let diag = if k == 0 {
            (b - a) / (ab + 2.0)
        } else {
            let t = 2.0 * kf + ab;
            (b * b - a * a) / (t * (t + 2.0))
        };
        jac[(k, k)] = diag;
        if k + 1 < n {
            let m = kf + 1.0;
            let t = 2.0 * m + ab;
            let beta = if k == 0 {
                4.0 * (1.0 + a) * (1.0 + b) / ((2.0 + ab).powi(2) * (3.0 + ab))
            } else {
                4.0 * m * (m + a) * (m + b) * (m + ab) / (t * t * (t + 1.0) * (t - 1.0))
            };
            let off = beta.sqrt();
            jac[(k, k + 1)] = off;
            jac[(k + 1, k)] = off;
        }
    }
    let mu0 = ((ab + 1.0) * std::f64::consts::LN_2 + ln_gamma(a + 1.0) + ln_gamma(b + 1.0)
        - ln_gamma(ab + 2.0))
    .exp();
    let eig = SymmetricEigen::new(jac);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| (eig.eigenvalues[i], mu0 * eig.eigenvectors[(0, i)].powi(2)))
        .collect();
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
    Rule {
        a,
        b,
        nodes: pairs.iter().map(|p| p.0).collect(),
        weights: pairs.iter().map(|p| p.1).collect(),
    }
}

impl Rule {
    /// `∫_lo^hi (hi - t)^a (t - lo)^b f(t) dt`.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, lo: f64, hi: f64, mut f: F) -> f64 {
        let half = 0.5 * (hi - lo);
        let scale = half.powf(self.a + self.b + 1.0);
        let mut acc = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc += w * f(lo + (x + 1.0) * half);
        }
        acc * scale
    }

    /// Mapped nodes and weights on `[lo, hi]` (weights include the Jacobi scale).
    pub fn mapped(&self, lo: f64, hi: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (hi - lo);
        let scale = half.powf(self.a + self.b + 1.0);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(x, w)| (lo + (x + 1.0) * half, w * scale))
    }
}

/// `∫_lo^hi f(t) (hi - t)^e dt` by an `n`-point Gauss-Jacobi rule.
pub fn right_singular<F: FnMut(f64) -> f64>(lo: f64, hi: f64, e: f64, n: usize, f: F) -> f64 {
    if hi <= lo {
        return 0.0;
    }
    gauss_jacobi(n, e, 0.0).integrate(lo, hi, f)
}

/// Integrates `f` on `[lo, hi]` where `f` may have an integrable algebraic
/// singularity at `lo`: geometric panels shrinking towards `lo` with
/// Gauss-Legendre on each, plus a final Jacobi panel with `(t - lo)^e`.
pub fn graded_towards_left<F: FnMut(f64) -> f64>(
    lo: f64,
    hi: f64,
    levels: usize,
    nodes: usize,
    e: f64,
    mut f: F,
) -> f64 {
    if hi <= lo {
        return 0.0;
    }
    let gl = gauss_legendre(nodes);
    let mut acc = 0.0;
    let mut right = hi;
    for _ in 0..levels {
        let left = lo + 0.5 * (right - lo);
        acc += gl.integrate(left, right, &mut f);
        right = left;
    }
    let gj = gauss_jacobi(nodes, 0.0, e);
    acc + gj.integrate(lo, right, |t| f(t) / (t - lo).powf(e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_integrates_polynomials_exactly() {
        let r = gauss_legendre(8);
        for deg in 0..16 {
            let exact = 1.0 / (deg as f64 + 1.0);
            let got = r.integrate(0.0, 1.0, |t| t.powi(deg));
            assert!((got - exact).abs() < 1e-14, "deg {deg}: {got} vs {exact}");
        }
    }

    #[test]
    fn jacobi_weight_moments() {
        // ∫_0^1 (1-t)^a t^k dt = B(k+1, a+1)
        for &a in &[-0.5, -0.25, 0.3, 1.5] {
            let r = gauss_jacobi(20, a, 0.0);
            for k in 0..10 {
                let exact = (ln_gamma(k as f64 + 1.0) + ln_gamma(a + 1.0) - ln_gamma(k as f64 + a + 2.0)).exp();
                let got = r.integrate(0.0, 1.0, |t| t.powi(k));
                assert!((got - exact).abs() < 1e-13 * exact.max(1.0), "a={a} k={k}");
            }
        }
    }

    #[test]
    fn two_sided_weight() {
        // ∫_0^1 (1-t)^{-1/2} t^{-1/2} dt = π
        let got = gauss_jacobi(5, -0.5, -0.5).integrate(0.0, 1.0, |_| 1.0);
        assert!((got - std::f64::consts::PI).abs() < 1e-13);
    }

    #[test]
    fn graded_handles_left_singularity() {
        // ∫_0^1 t^{-0.3} cos(t) dt with t^{-0.3} not passed as a weight exponent
        let reference = gauss_jacobi(40, 0.0, -0.3).integrate(0.0, 1.0, f64::cos);
        let got = graded_towards_left(0.0, 1.0, 30, 16, -0.3, |t| t.powf(-0.3) * t.cos());
        assert!((got - reference).abs() < 1e-10, "{got} vs {reference}");
    }
}
