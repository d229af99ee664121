//! The fractional discrepancy function `Δ_α` and `D*_{α,s,p',q'}`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::kernel::{check_kernel_alpha, kernel_ks_quadrature, kernel_mean_quadrature, FracKernel};
use crate::haar::Exponent;
use crate::nets::PointSet;
use crate::quadrature::{gauss_jacobi, gauss_legendre};
use crate::{par, Error, Result};

/// How `D*` is evaluated.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DiscrepancyMethod {
    /// Closed kernel expansion; `p' = q' = 2`, `α > 1/2`.
    Warnock,
    /// Tensor quadrature on the partition induced by the point coordinates.
    TensorQuad,
    /// Plain Monte Carlo with a seeded ChaCha8 stream.
    MonteCarlo { samples: usize, seed: u64 },
}

impl DiscrepancyMethod {
    pub fn name(&self) -> &'static str {
        match self {
            DiscrepancyMethod::Warnock => "warnock",
            DiscrepancyMethod::TensorQuad => "tensor-quad",
            DiscrepancyMethod::MonteCarlo { .. } => "monte-carlo",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DiscrepancyResult {
    pub value: f64,
    pub method: DiscrepancyMethod,
    pub error_estimate: f64,
    /// `∫ |Δ_α(·, u, P)|^{p'}` per nonempty `u` (the supremum for `p' = ∞`),
    /// when the method produces it.
    pub per_u: Option<Vec<(Vec<usize>, f64)>>,
}

/// Nonempty subsets of `{0, .., s-1}` in bitmask order.
pub fn nonempty_subsets(s: usize) -> Vec<Vec<usize>> {
    (1u32..(1 << s)).map(|mask| (0..s).filter(|&j| mask >> j & 1 == 1).collect()).collect()
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::Precondition(format!("alpha = {alpha} outside (0, 1]")));
    }
    Ok(())
}

/// `(x - t)_+^{α-1}`, with `1_{x > t}` for `α = 1`.
#[inline]
fn singular_factor(alpha: f64, x: f64, t: f64) -> f64 {
    if x <= t {
        if alpha < 1.0 && x == t {
            f64::INFINITY
        } else {
            0.0
        }
    } else if alpha == 1.0 {
        1.0
    } else {
        (x - t).powf(alpha - 1.0)
    }
}

/// `Δ_α(t_u, u, P) = α^{-|u|} Π_{j∈u} (1-t_j)^α - (1/N) Σ_n Π_{j∈u} (x_{n,j} - t_j)_+^{α-1}`.
///
/// For `α < 1`, evaluating at a point coordinate (`t_j = x_{n,j}`) makes the
/// second term diverge and the result is `-∞`.
pub fn delta_alpha(t_u: &[f64], u: &[usize], p: &PointSet, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if u.is_empty() {
        return Err(Error::InvalidParameter("delta_alpha needs a nonempty subset".into()));
    }
    if t_u.len() != u.len() {
        return Err(Error::DimensionMismatch { expected: u.len(), found: t_u.len() });
    }
    if let Some(&j) = u.iter().find(|&&j| j >= p.dim()) {
        return Err(Error::InvalidIndex(format!("coordinate {j} outside dimension {}", p.dim())));
    }
    Ok(delta_points(&p.to_f64(), alpha, u, t_u))
}

fn delta_points(points: &[Vec<f64>], alpha: f64, u: &[usize], t: &[f64]) -> f64 {
    let smooth: f64 = t.iter().map(|&tj| (1.0 - tj).powf(alpha) / alpha).product();
    let mut count = 0.0;
    for x in points {
        let mut prod = 1.0;
        for (&j, &tj) in u.iter().zip(t) {
            prod *= singular_factor(alpha, x[j], tj);
            if prod == 0.0 {
                break;
            }
        }
        count += prod;
    }
    smooth - count / points.len() as f64
}

fn check_method(alpha: f64, pprime: Exponent, qprime: Exponent, method: DiscrepancyMethod) -> Result<()> {
    check_alpha(alpha)?;
    if alpha < 1.0 {
        match pprime {
            Exponent::Infinite => {
                return Err(Error::Precondition(format!("p' = inf requires alpha = 1, got {alpha}")));
            }
            Exponent::Finite(pp) if pp * (1.0 - alpha) >= 1.0 => {
                return Err(Error::Precondition(format!(
                    "p' = {pp} violates p'(1 - alpha) < 1 for alpha = {alpha}"
                )));
            }
            _ => {}
        }
    }
    match method {
        DiscrepancyMethod::Warnock => {
            if pprime != Exponent::Finite(2.0) || qprime != Exponent::Finite(2.0) {
                return Err(Error::Precondition("the Warnock formula needs p' = q' = 2".into()));
            }
            check_kernel_alpha(alpha)?;
        }
        DiscrepancyMethod::MonteCarlo { samples, .. } => {
            if pprime.is_infinite() {
                return Err(Error::Precondition("Monte Carlo needs finite p'".into()));
            }
            if samples < 2 {
                return Err(Error::InvalidParameter("Monte Carlo needs at least two samples".into()));
            }
        }
        DiscrepancyMethod::TensorQuad => {}
    }
    Ok(())
}

/// `D*_{α,s,p',q'}(P) = (Σ_{u≠∅} (∫ |Δ_α(t_u, u, P)|^{p'} dt_u)^{q'/p'})^{1/q'}`.
///
/// `tol` is the relative tolerance for the tensor quadrature and ignored by
/// the other methods.
pub fn frac_discrepancy(
    p: &PointSet,
    alpha: f64,
    pprime: Exponent,
    qprime: Exponent,
    method: DiscrepancyMethod,
    tol: f64,
) -> Result<DiscrepancyResult> {
    frac_discrepancy_points(&p.to_f64(), alpha, pprime, qprime, method, tol)
}

/// [`frac_discrepancy`] for points given as coordinate rows in `[0, 1)^s`.
pub fn frac_discrepancy_points(
    points: &[Vec<f64>],
    alpha: f64,
    pprime: Exponent,
    qprime: Exponent,
    method: DiscrepancyMethod,
    tol: f64,
) -> Result<DiscrepancyResult> {
    check_method(alpha, pprime, qprime, method)?;
    let s = check_points(points)?;
    match method {
        DiscrepancyMethod::Warnock => warnock(points, s, alpha),
        DiscrepancyMethod::TensorQuad => tensor_quad(points, s, alpha, pprime, qprime, tol),
        DiscrepancyMethod::MonteCarlo { samples, seed } => {
            monte_carlo(points, s, alpha, pprime, qprime, samples, seed)
        }
    }
}

fn check_points(points: &[Vec<f64>]) -> Result<usize> {
    let first = points.first().ok_or_else(|| Error::InvalidParameter("point set is empty".into()))?;
    let s = first.len();
    if s == 0 {
        return Err(Error::InvalidParameter("dimension must be positive".into()));
    }
    for x in points {
        if x.len() != s {
            return Err(Error::DimensionMismatch { expected: s, found: x.len() });
        }
        if let Some(v) = x.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::InvalidParameter(format!("coordinate {v} outside [0, 1]")));
        }
    }
    Ok(s)
}

/// `sqrt` of a squared quantity known up to `err2`, with the propagated error.
fn root_with_error(sq: f64, err2: f64) -> (f64, f64) {
    let value = sq.max(0.0).sqrt();
    (value, err2 / value.max(err2.sqrt()))
}

fn warnock(points: &[Vec<f64>], s: usize, alpha: f64) -> Result<DiscrepancyResult> {
    let k = FracKernel::new(alpha)?;
    let n = points.len();
    let nf = n as f64;
    let a = k.a();
    let b_terms: Vec<f64> = points.iter().map(|x| x.iter().map(|&v| 1.0 + k.b(v)).product::<f64>()).collect();
    let rows = par::map_range(n, |i| {
        let xi = &points[i];
        let diag: f64 = xi.iter().map(|&v| 1.0 + k.c(v, v)).product::<f64>() - 1.0;
        let off: Vec<f64> = points[i + 1..]
            .iter()
            .map(|xj| xi.iter().zip(xj).map(|(&u, &v)| 1.0 + k.c(u, v)).product::<f64>() - 1.0)
            .collect();
        diag + 2.0 * par::pairwise_sum(&off)
    });
    let first = (1.0 + a).powi(s as i32) - 1.0;
    let b_minus: Vec<f64> = b_terms.iter().map(|v| v - 1.0).collect();
    let second = 2.0 / nf * par::pairwise_sum(&b_minus);
    let third = par::pairwise_sum(&rows) / (nf * nf);
    let sq = first - second + third;
    let magnitude = first + second.abs() + third.abs() + 1.0;
    let (value, error_estimate) = root_with_error(sq, 1e-13 * magnitude);
    Ok(DiscrepancyResult { value, method: DiscrepancyMethod::Warnock, error_estimate, per_u: None })
}

/// Nodes and weights on `[0, 1]` for one axis: Gauss-Legendre panels between
/// consecutive point coordinates, graded towards each coordinate from the
/// left, with a Jacobi panel carrying `(x - t)^e` at the coordinate itself.
fn axis_rule(coords: &[f64], e: f64, levels: usize, nodes: usize) -> (Vec<f64>, Vec<f64>) {
    let mut breaks: Vec<f64> = coords.to_vec();
    breaks.push(0.0);
    breaks.push(1.0);
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let gl = gauss_legendre(nodes);
    let gj = gauss_jacobi(nodes, e, 0.0);
    let mut ts = Vec::new();
    let mut ws = Vec::new();
    for pair in breaks.windows(2) {
        let (lo, hi) = (pair[0], pair[1]);
        let singular = e != 0.0 && coords.contains(&hi);
        if !singular {
            for (t, w) in gl.mapped(lo, hi) {
                ts.push(t);
                ws.push(w);
            }
            continue;
        }
        let len = hi - lo;
        let mut left = lo;
        for lev in 1..=levels {
            let right = hi - len * 0.5f64.powi(lev as i32);
            for (t, w) in gl.mapped(left, right) {
                ts.push(t);
                ws.push(w);
            }
            left = right;
        }
        for (t, w) in gj.mapped(left, hi) {
            ts.push(t);
            ws.push(w / (hi - t).powf(e));
        }
    }
    (ts, ws)
}

/// Budget on tensor nodes per subset.
const TENSOR_BUDGET: usize = 20_000_000;
const MAX_REFINEMENTS: usize = 16;
/// Deepest geometric grading towards a point coordinate.
const MAX_GRADED_LEVELS: usize = 36;

fn subset_integral(points: &[Vec<f64>], alpha: f64, pp: f64, u: &[usize], levels: usize, nodes: usize) -> Option<f64> {
    let e = if alpha < 1.0 { pp * (alpha - 1.0) } else { 0.0 };
    let axes: Vec<(Vec<f64>, Vec<f64>)> = u
        .iter()
        .map(|&j| {
            let coords: Vec<f64> = points.iter().map(|x| x[j]).filter(|&v| v > 0.0).collect();
            axis_rule(&coords, e, levels, nodes)
        })
        .collect();
    let total: usize = axes.iter().map(|a| a.0.len()).product();
    if total > TENSOR_BUDGET {
        return None;
    }
    // per-axis tables of the smooth factor and of every point's singular factor
    let smooth: Vec<Vec<f64>> = axes.iter().map(|(ts, _)| ts.iter().map(|&t| (1.0 - t).powf(alpha) / alpha).collect()).collect();
    let sing: Vec<Vec<Vec<f64>>> = u
        .iter()
        .zip(&axes)
        .map(|(&j, (ts, _))| points.iter().map(|x| ts.iter().map(|&t| singular_factor(alpha, x[j], t)).collect()).collect())
        .collect();
    let n = points.len();
    let inv_n = 1.0 / n as f64;
    let d = u.len();
    let first_len = axes[0].0.len();
    let rest: Vec<usize> = axes[1..].iter().map(|a| a.0.len()).collect();
    let rest_total: usize = rest.iter().product();
    let slices = par::map_range(first_len, |i0| {
        let mut acc = Vec::with_capacity(rest_total);
        let mut idx = vec![0usize; d];
        idx[0] = i0;
        for flat in 0..rest_total {
            let mut r = flat;
            for (a, &len) in rest.iter().enumerate().rev() {
                idx[a + 1] = r % len;
                r /= len;
            }
            let mut w = 1.0;
            let mut sm = 1.0;
            for a in 0..d {
                w *= axes[a].1[idx[a]];
                sm *= smooth[a][idx[a]];
            }
            let mut cnt = 0.0;
            for pt in 0..n {
                let mut prod = 1.0;
                for a in 0..d {
                    prod *= sing[a][pt][idx[a]];
                    if prod == 0.0 {
                        break;
                    }
                }
                cnt += prod;
            }
            acc.push(w * (sm - cnt * inv_n).abs().powf(pp));
        }
        par::pairwise_sum(&acc)
    });
    Some(par::pairwise_sum(&slices))
}

/// Essential supremum of `|Δ_1(·, u, P)|` over `[0, 1]^u`: on each open grid
/// cell the counting term is constant and the volume term is monotone.
fn subset_sup_alpha_one(points: &[Vec<f64>], u: &[usize]) -> f64 {
    let grids: Vec<Vec<f64>> = u
        .iter()
        .map(|&j| {
            let mut b: Vec<f64> = points.iter().map(|x| x[j]).collect();
            b.push(0.0);
            b.push(1.0);
            b.sort_by(f64::total_cmp);
            b.dedup();
            b
        })
        .collect();
    let cells: Vec<usize> = grids.iter().map(|g| g.len() - 1).collect();
    let total: usize = cells.iter().product();
    let inv_n = 1.0 / points.len() as f64;
    let sups = par::map_range(total, |flat| {
        let mut r = flat;
        let mut lo = vec![0.0; u.len()];
        let mut hi = vec![0.0; u.len()];
        for a in (0..u.len()).rev() {
            let c = r % cells[a];
            r /= cells[a];
            lo[a] = grids[a][c];
            hi[a] = grids[a][c + 1];
        }
        let cnt = points.iter().filter(|x| u.iter().zip(&hi).all(|(&j, &h)| x[j] >= h)).count() as f64 * inv_n;
        let at_lo: f64 = lo.iter().map(|v| 1.0 - v).product();
        let at_hi: f64 = hi.iter().map(|v| 1.0 - v).product();
        (at_lo - cnt).abs().max((at_hi - cnt).abs())
    });
    sups.into_iter().fold(0.0, f64::max)
}

fn combine(per_u: &[f64], pprime: Exponent, qprime: Exponent) -> f64 {
    let norms: Vec<f64> = per_u
        .iter()
        .map(|&v| match pprime {
            Exponent::Infinite => v,
            Exponent::Finite(pp) => v.max(0.0).powf(1.0 / pp),
        })
        .collect();
    qprime.norm(&norms)
}

fn tensor_quad(
    points: &[Vec<f64>],
    s: usize,
    alpha: f64,
    pprime: Exponent,
    qprime: Exponent,
    tol: f64,
) -> Result<DiscrepancyResult> {
    let subsets = nonempty_subsets(s);
    let pp = match pprime {
        Exponent::Infinite => {
            let per: Vec<f64> = subsets.iter().map(|u| subset_sup_alpha_one(points, u)).collect();
            let value = combine(&per, pprime, qprime);
            return Ok(DiscrepancyResult {
                value,
                method: DiscrepancyMethod::TensorQuad,
                error_estimate: 4.0 * f64::EPSILON * (1.0 + value),
                per_u: Some(subsets.into_iter().zip(per).collect()),
            });
        }
        Exponent::Finite(pp) => pp,
    };
    let mut coarse = Vec::with_capacity(subsets.len());
    let mut fine = Vec::with_capacity(subsets.len());
    for u in &subsets {
        let (mut levels, mut nodes) = match u.len() {
            1 => (30, 16),
            2 => (16, 8),
            _ => (6, 4),
        };
        let mut prev = subset_integral(points, alpha, pp, u, levels, nodes)
            .ok_or_else(|| Error::Budget(format!("tensor quadrature for subset {u:?} exceeds the node budget")))?;
        let mut best = None;
        for _ in 0..MAX_REFINEMENTS {
            levels = (levels + 10).min(MAX_GRADED_LEVELS);
            nodes += 2;
            match subset_integral(points, alpha, pp, u, levels, nodes) {
                Some(next) if next.is_finite() => {
                    let done = (next - prev).abs() <= tol * next.abs();
                    best = Some((prev, next));
                    if done {
                        break;
                    }
                    prev = next;
                }
                _ => break,
            }
        }
        let (c, f) = best.ok_or_else(|| Error::Budget(format!("tensor quadrature for subset {u:?} cannot be refined")))?;
        coarse.push(c);
        fine.push(f);
    }
    let value = combine(&fine, pprime, qprime);
    let error_estimate = (combine(&coarse, pprime, qprime) - value).abs();
    Ok(DiscrepancyResult {
        value,
        method: DiscrepancyMethod::TensorQuad,
        error_estimate,
        per_u: Some(subsets.into_iter().zip(fine).collect()),
    })
}

const MC_CHUNK: usize = 1 << 14;

fn monte_carlo(
    points: &[Vec<f64>],
    s: usize,
    alpha: f64,
    pprime: Exponent,
    qprime: Exponent,
    samples: usize,
    seed: u64,
) -> Result<DiscrepancyResult> {
    let pp = pprime.as_f64();
    let subsets = nonempty_subsets(s);
    let nu = subsets.len();
    let chunks = samples.div_ceil(MC_CHUNK);
    let inv_n = 1.0 / points.len() as f64;
    let values: Vec<Vec<f64>> = par::map_range(chunks, |c| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(c as u64);
        let len = MC_CHUNK.min(samples - c * MC_CHUNK);
        let mut out = Vec::with_capacity(len * nu);
        let mut t = vec![0.0; s];
        let mut f = vec![0.0; points.len() * s];
        for _ in 0..len {
            for v in t.iter_mut() {
                *v = rng.random::<f64>();
            }
            for (n, x) in points.iter().enumerate() {
                for j in 0..s {
                    f[n * s + j] = singular_factor(alpha, x[j], t[j]);
                }
            }
            for u in &subsets {
                let smooth: f64 = u.iter().map(|&j| (1.0 - t[j]).powf(alpha) / alpha).product();
                let mut cnt = 0.0;
                for n in 0..points.len() {
                    cnt += u.iter().map(|&j| f[n * s + j]).product::<f64>();
                }
                out.push((smooth - cnt * inv_n).abs().powf(pp));
            }
        }
        out
    });
    let mut sums = vec![0.0; nu];
    for chunk in &values {
        for (i, v) in chunk.iter().enumerate() {
            sums[i % nu] += v;
        }
    }
    let m = samples as f64;
    let means: Vec<f64> = sums.iter().map(|v| v / m).collect();
    let value = combine(&means, pprime, qprime);
    // delta method: sensitivity of the combined value to each subset mean
    let grad: Vec<f64> = match qprime {
        Exponent::Infinite => {
            let best = (0..nu).max_by(|&a, &b| means[a].total_cmp(&means[b])).unwrap_or(0);
            (0..nu)
                .map(|i| if i == best && means[i] > 0.0 { means[i].powf(1.0 / pp - 1.0) / pp } else { 0.0 })
                .collect()
        }
        Exponent::Finite(qp) => {
            let r = qp / pp;
            let total: f64 = means.iter().map(|v| v.powf(r)).sum();
            means
                .iter()
                .map(|&v| if v > 0.0 { total.powf(1.0 / qp - 1.0) * r / qp * v.powf(r - 1.0) } else { 0.0 })
                .collect()
        }
    };
    let mut mean_z = 0.0;
    let mut sq_z = 0.0;
    for chunk in &values {
        for row in chunk.chunks(nu) {
            let z: f64 = row.iter().zip(&grad).map(|(v, g)| v * g).sum();
            mean_z += z;
            sq_z += z * z;
        }
    }
    mean_z /= m;
    let var = (sq_z / m - mean_z * mean_z).max(0.0) * m / (m - 1.0);
    Ok(DiscrepancyResult {
        value,
        method: DiscrepancyMethod::MonteCarlo { samples, seed },
        error_estimate: (var / m).sqrt(),
        per_u: Some(subsets.into_iter().zip(means).collect()),
    })
}

/// The classical `L_2` star discrepancy by Warnock's formula
/// `3^{-s} - (2/N) Σ_n Π_j (1 - x_{n,j}^2)/2 + (1/N²) Σ_{n,n'} Π_j (1 - max(x_{n,j}, x_{n',j}))`.
pub fn l2_star_discrepancy(points: &[Vec<f64>]) -> Result<f64> {
    let s = check_points(points)?;
    let n = points.len() as f64;
    let first = 3f64.powi(-(s as i32));
    let second: Vec<f64> = points.iter().map(|x| x.iter().map(|v| 0.5 * (1.0 - v * v)).product()).collect();
    let rows = par::map_range(points.len(), |i| {
        let row: Vec<f64> = points
            .iter()
            .map(|y| points[i].iter().zip(y).map(|(a, b)| 1.0 - a.max(*b)).product())
            .collect();
        par::pairwise_sum(&row)
    });
    let sq = first - 2.0 / n * par::pairwise_sum(&second) + par::pairwise_sum(&rows) / (n * n);
    Ok(sq.max(0.0).sqrt())
}

/// Worst-case error on `H_{α,s,2,2}` from the reproducing kernel:
/// `∫∫K - (2/N) Σ_n ∫K(x_n, ·) + (1/N²) Σ_{n,n'} K(x_n, x_{n'})`, with every
/// kernel value obtained by direct quadrature.
pub fn rkhs_worst_case_error(points: &[Vec<f64>], alpha: f64, tol: f64) -> Result<f64> {
    check_kernel_alpha(alpha)?;
    let s = check_points(points)?;
    let n = points.len() as f64;
    let mean_all = (1.0 + 1.0 / (alpha * alpha * (2.0 * alpha + 1.0))).powi(s as i32);
    let means = points
        .iter()
        .map(|x| x.iter().try_fold(1.0, |acc, &v| Ok(acc * (1.0 + kernel_mean_quadrature(alpha, v, tol)?))))
        .collect::<Result<Vec<f64>>>()?;
    let rows = par::map_range(points.len(), |i| {
        points
            .iter()
            .map(|y| kernel_ks_quadrature(alpha, &points[i], y, tol))
            .collect::<Result<Vec<f64>>>()
            .map(|r| par::pairwise_sum(&r))
    });
    let rows = rows.into_iter().collect::<Result<Vec<f64>>>()?;
    let sq = mean_all - 2.0 / n * par::pairwise_sum(&means) + par::pairwise_sum(&rows) / (n * n);
    Ok(sq.max(0.0).sqrt())
}
