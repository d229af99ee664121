//! Worst-case error bounds for QMC rules on Haar wavelet spaces.
//!
//! * [`wce_upper_dual`]: the dual-norm sum over levels `1 ≤ |j| ≤ J_max`,
//!   computed from exact point counts, plus a rigorous analytic bound for
//!   the remaining levels.
//! * [`mock_lower_bound`]: the integral-to-norm ratio of a nonnegative
//!   function in `V^{s,m}` that vanishes on the point set.
//! * [`wce_exact_hilbert`]: the worst-case error on the fractional Hilbert
//!   space `H_{α,s,2,2}`.

use std::collections::BTreeSet;

use crate::combinatorics::{binomial, compositions, level_vectors, pow128};
use crate::fractional::{frac_discrepancy, DiscrepancyMethod};
use crate::haar::analysis::{analyze_masses, half_exponent, point_level_blocks};
use crate::haar::{half_power_f64, Exponent, SpaceParams};
use crate::nets::{t_value, PointSet};
use crate::{par, Error, Result};

/// Upper bound `(truncated^{q'} + tail^{q'})^{1/q'}` on the worst-case error.
#[derive(Clone, Debug, PartialEq)]
pub struct WceBound {
    pub truncated: f64,
    pub tail: f64,
    pub total: f64,
    pub j_max: u32,
    /// The net quality parameter used for the tail, when `P` is a net.
    pub t: Option<u32>,
    /// Exactness level `L` used by the tail (`m - t` for nets).
    pub level: u32,
    /// Set when the tail uses the trivial per-cell cap `N`.
    pub generic_tail: bool,
    pub params: SpaceParams,
}

/// Default truncation level for a net of exactness level `L`.
pub fn default_j_max(sp: &SpaceParams, level: u32) -> u32 {
    let b = sp.base as f64;
    let extra_dim = sp.dim as f64 * 2f64.ln() / b.ln();
    let decay = match sp.q_dual() {
        Exponent::Infinite => 0.0,
        Exponent::Finite(qd) => 40.0 * 2f64.ln() / (qd * sp.gap() * b.ln()),
    };
    let jm = level + (extra_dim + decay).ceil() as u32;
    jm.min(4 * level.max(1))
}

/// `Σ_{k,i} |Q_P(Ψ^j_{i,k})|^{p'}` (or the maximum for `p' = ∞`), exactly
/// counted and then rounded.
fn level_dual_term(p: &PointSet, j: &[u32], p_dual: Exponent) -> Result<f64> {
    let lb = point_level_blocks(p, j)?;
    let scale = half_power_f64(p.base(), half_exponent(j)) / p.len() as f64;
    Ok(match p_dual {
        Exponent::Infinite => {
            let m = lb.blocks.iter().flat_map(|b| b.sums.iter()).map(|v| v.abs()).max().unwrap_or(0);
            m as f64 * scale
        }
        Exponent::Finite(pd) => {
            let powers: Vec<f64> = lb
                .blocks
                .iter()
                .flat_map(|b| b.sums.iter())
                .filter(|&&v| v != 0)
                .map(|&v| (v.abs() as f64 * scale).powf(pd))
                .collect();
            par::pairwise_sum(&powers)
        }
    })
}

/// Number of level vectors with `|j| = ν` and exactly `J` nonzero entries.
fn shape_count(s: usize, nu: u32, big_j: usize) -> f64 {
    if big_j == 0 {
        return if nu == 0 { 1.0 } else { 0.0 };
    }
    binomial(s as u64, big_j as u64) * binomial(nu as u64 - 1, big_j as u64 - 1)
}

/// Analytic bound on the dual sum over all levels `|j| > j_max`.
///
/// Per level vector the bound is `A · w^J · b^{-(α-1/p)|j|}` with
/// `A = b^{-(L+1)/p}`, `w = b - 1` for nets, and `A = 1`,
/// `w = (b - 1) b^{-1/p}` for arbitrary point sets.
fn tail_bound(sp: &SpaceParams, level: u32, j_max: u32, generic: bool) -> f64 {
    let b = sp.base as f64;
    let s = sp.dim;
    let g = sp.gap();
    let inv_p = sp.p.recip();
    let (lead, w) = if generic {
        (1.0, (b - 1.0) * b.powf(-inv_p))
    } else {
        (b.powf(-(level as f64 + 1.0) * inv_p), b - 1.0)
    };
    match sp.q_dual() {
        Exponent::Infinite => {
            let mut best = 0.0f64;
            for nu in j_max + 1..=j_max + s as u32 + 1 {
                let jj = s.min(nu as usize);
                best = best.max(w.powi(jj as i32) * b.powf(-g * nu as f64));
            }
            lead * best
        }
        Exponent::Finite(qd) => {
            let term = |nu: u32| -> f64 {
                let c: f64 = (1..=s.min(nu as usize))
                    .map(|jj| shape_count(s, nu, jj) * w.powf(qd * jj as f64))
                    .sum();
                c * b.powf(-qd * g * nu as f64)
            };
            let decay = b.powf(-qd * g);
            let mut sum = 0.0;
            let mut nu = j_max + 1;
            loop {
                let a = term(nu);
                sum += a;
                // consecutive terms shrink at least by decay · ν/(ν - s + 1) once ν ≥ s
                if nu as usize >= s {
                    let rho = decay * nu as f64 / (nu as f64 - s as f64 + 1.0);
                    if rho < 1.0 {
                        let rest = a * rho / (1.0 - rho);
                        if rest <= 1e-17 * sum || nu > j_max + 100_000 {
                            sum += rest;
                            break;
                        }
                    }
                }
                nu += 1;
            }
            lead * sum.powf(1.0 / qd)
        }
    }
}

/// Dual-sum upper bound on `e^wor(Q_P, H_{wav,α,s,p,q})`.
///
/// When `j_max` is `None` the default from [`default_j_max`] is used. The net
/// tail is used whenever `|P| = b^m` and the verifier yields `t`; otherwise
/// the tail falls back to the trivial cap and the result is flagged.
pub fn wce_upper_dual(p: &PointSet, sp: &SpaceParams, j_max: Option<u32>) -> Result<WceBound> {
    check_params(p, sp)?;
    if !sp.eval_ok() {
        return Err(Error::Precondition(format!(
            "point evaluation undefined for alpha = {}, p = {}, q = {}",
            sp.alpha, sp.p, sp.q
        )));
    }
    let (t, level, generic) = match p.net_exponent() {
        Some(m) => {
            let t = t_value(p)?;
            (Some(t), m - t, false)
        }
        None => (None, (p.len() as f64).log(sp.base as f64).floor() as u32, true),
    };
    let j_max = j_max.unwrap_or_else(|| default_j_max(sp, level));
    if j_max < level {
        return Err(Error::Precondition(format!(
            "j_max = {j_max} is below the exactness level {level}"
        )));
    }
    let shapes = level_vectors(1, j_max, sp.dim);
    let p_dual = sp.p_dual();
    let raw = par::map_collect(&shapes, |j| level_dual_term(p, j, p_dual));
    let b = sp.base as f64;
    let weight = sp.level_exponent();
    let mut levels = Vec::with_capacity(shapes.len());
    for (j, r) in shapes.iter().zip(raw) {
        let inner = match p_dual {
            Exponent::Infinite => r?,
            Exponent::Finite(pd) => r?.powf(1.0 / pd),
        };
        let l: u32 = j.iter().sum();
        levels.push(b.powf(-weight * l as f64) * inner);
    }
    let q_dual = sp.q_dual();
    let truncated = q_dual.norm(&levels);
    let tail = tail_bound(sp, level, j_max, generic);
    let total = q_dual.norm(&[truncated, tail]);
    Ok(WceBound { truncated, tail, total, j_max, t, level, generic_tail: generic, params: *sp })
}

fn check_params(p: &PointSet, sp: &SpaceParams) -> Result<()> {
    if sp.base != p.base() {
        return Err(Error::InvalidParameter(format!(
            "space base {} differs from point set base {}",
            sp.base,
            p.base()
        )));
    }
    if sp.dim != p.dim() {
        return Err(Error::DimensionMismatch { expected: p.dim(), found: sp.dim });
    }
    Ok(())
}

/// How the norm of the mocking function is obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NormMode {
    /// Full enumeration of its wavelet coefficients.
    Exact,
    /// The closed-form upper bound on the norm.
    Analytic,
}

/// The mocking function's data and the resulting lower bound.
#[derive(Clone, Debug, PartialEq)]
pub struct MockBound {
    /// Resolution `m` with `b^{m-1} < 2N ≤ b^m`.
    pub m: u32,
    /// `I_s(f_0)`.
    pub integral: f64,
    /// `‖f_0‖` (exact mode) or its upper bound (analytic mode).
    pub norm: f64,
    /// `I_s(f_0) / norm`.
    pub value: f64,
    pub mode: NormMode,
}

/// Maximum number of wavelet coefficients enumerated in exact mode.
pub const MOCK_COEFF_BUDGET: u128 = 200_000_000;

/// Lower bound on `e^wor(Q_P, H̃_{wav,α,s,p,q})` from the function
/// `f_0 = Σ_{|j'| = m} 1_{empty level-j' cells}`, which vanishes on `P`.
pub fn mock_lower_bound(p: &PointSet, sp: &SpaceParams, mode: NormMode) -> Result<MockBound> {
    check_params(p, sp)?;
    if p.is_empty() {
        return Err(Error::InvalidParameter("point set is empty".into()));
    }
    if sp.alpha <= 0.0 {
        return Err(Error::Precondition(format!("smoothness {} must be positive", sp.alpha)));
    }
    let b = sp.base;
    let n = p.len() as u128;
    let mut m = 0u32;
    while pow128(b, m) < 2 * n {
        m += 1;
    }
    if m as f64 * (b as f64).log2() > 40.0 {
        return Err(Error::Budget(format!("resolution {b}^{m} too fine")));
    }
    let tops = compositions(m, sp.dim);
    let occupied: Vec<Vec<u128>> = tops
        .iter()
        .map(|j| {
            let cells: BTreeSet<u128> = p.cell_indices(j).into_iter().collect();
            cells.into_iter().collect()
        })
        .collect();
    let bm = pow128(b, m) as f64;
    let integral: f64 = occupied.iter().map(|occ| (bm - occ.len() as f64) / bm).sum();
    let norm = match mode {
        NormMode::Analytic => analytic_mock_norm(sp, m),
        NormMode::Exact => exact_mock_norm(p, sp, m, &tops, &occupied)?,
    };
    Ok(MockBound { m, integral, norm, value: integral / norm, mode })
}

/// `(b-1)^s [Σ_ν b^{-qαν} C(ν+s-1,s-1)^q]^{1/q} b^{αm} C(m+s-1,s-1)^{1/q}`,
/// and `(b-1)^s sup_ν b^{-αν} C(ν+s-1,s-1) b^{αm}` for `q = ∞`.
fn analytic_mock_norm(sp: &SpaceParams, m: u32) -> f64 {
    let b = sp.base as f64;
    let s = sp.dim as u64;
    let a = sp.alpha;
    let lead = (b - 1.0).powi(sp.dim as i32) * b.powf(a * m as f64);
    match sp.q {
        Exponent::Infinite => {
            let mut best = 0.0f64;
            let mut nu = 0u64;
            loop {
                let v = b.powf(-a * nu as f64) * binomial(nu + s - 1, s - 1);
                best = best.max(v);
                // the sequence is unimodal; stop once it is decreasing past its peak
                if nu > s && v < best * 1e-3 {
                    break;
                }
                nu += 1;
            }
            lead * best
        }
        Exponent::Finite(q) => {
            let mut sum = 0.0;
            let mut nu = 0u64;
            loop {
                let v = (b.powf(-a * nu as f64) * binomial(nu + s - 1, s - 1)).powf(q);
                sum += v;
                if nu > s && v < sum * 1e-18 {
                    break;
                }
                nu += 1;
            }
            lead * sum.powf(1.0 / q) * binomial(m as u64 + s - 1, s - 1).powf(1.0 / q)
        }
    }
}

fn exact_mock_norm(
    p: &PointSet,
    sp: &SpaceParams,
    m: u32,
    tops: &[Vec<u32>],
    occupied: &[Vec<u128>],
) -> Result<f64> {
    let b = sp.base;
    let shapes = level_vectors(0, m, sp.dim);
    let count: u128 = shapes.iter().map(|j| pow128(b, j.iter().sum())).sum();
    if count > MOCK_COEFF_BUDGET {
        return Err(Error::Budget(format!(
            "{count} coefficients exceed the enumeration budget {MOCK_COEFF_BUDGET}"
        )));
    }
    let _ = p;
    let bm = pow128(b, m) as f64;
    let per_shape = par::map_collect(&shapes, |j| -> f64 {
        let extents: Vec<u128> = j.iter().map(|&l| pow128(b, l)).collect();
        let cells = extents.iter().product::<u128>() as usize;
        let sub = pow128(b, m - j.iter().sum::<u32>()) as f64;
        let mut masses = vec![0.0f64; cells];
        for (top, occ) in tops.iter().zip(occupied) {
            if top.iter().zip(j).any(|(t, l)| t < l) {
                continue;
            }
            // every level-j cell holds b^{m-|j|} cells of shape `top`
            for v in masses.iter_mut() {
                *v += sub;
            }
            let top_ext: Vec<u128> = top.iter().map(|&l| pow128(b, l)).collect();
            let mut last = None;
            let mut parents: Vec<usize> = occ
                .iter()
                .map(|&flat| {
                    let mut rest = flat;
                    let mut cell = vec![0u128; top.len()];
                    for c in (0..top.len()).rev() {
                        cell[c] = rest % top_ext[c];
                        rest /= top_ext[c];
                    }
                    cell.iter()
                        .zip(top)
                        .zip(j)
                        .zip(&extents)
                        .fold(0u128, |acc, (((&x, &tl), &jl), &e)| acc * e + x / pow128(b, tl - jl))
                        as usize
                })
                .collect();
            parents.sort_unstable();
            for parent in parents {
                if last != Some(parent) {
                    last = Some(parent);
                }
                masses[parent] -= 1.0;
            }
        }
        for v in masses.iter_mut() {
            *v /= bm;
        }
        analyze_masses(b, j, &mut masses);
        let scale = half_power_f64(b, half_exponent(j));
        let coeffs: Vec<f64> = masses.iter().map(|t| t * scale).collect();
        sp.p.norm(&coeffs)
    });
    let terms: Vec<(u32, f64)> = shapes.iter().map(|j| j.iter().sum()).zip(per_shape).collect();
    Ok(crate::haar::nested_norm(b, sp.level_exponent(), sp.q, &terms))
}

/// `e^wor(Q_P, H_{α,s,2,2})` on the fractional Hilbert space, via the
/// kernel (Warnock-type) formula.
pub fn wce_exact_hilbert(p: &PointSet, alpha: f64) -> Result<f64> {
    if !(alpha > 0.5 && alpha <= 1.0) {
        return Err(Error::Precondition(format!("alpha = {alpha} outside (1/2, 1]")));
    }
    let r = frac_discrepancy(p, alpha, Exponent::Finite(2.0), Exponent::Finite(2.0), DiscrepancyMethod::Warnock, 0.0)?;
    Ok(r.value)
}
