//! Exact checks of the univariate frame identities
//! `Σ_i ψ^j_{i,k} = 0` and `⟨ψ^j_{i,k}, ψ^{j'}_{i',k'}⟩ = δ_{jj'} δ_{kk'} (δ_{ii'} - 1/b)`.

use num_rational::BigRational;

use super::QSqrtB;
use crate::combinatorics::pow128;
use crate::{Error, Result};

/// `ψ^j_{i,k} = b^{j/2 - 1} (b·1_{E^j_{bk+i}} - 1_{E^{j-1}_k})` as a list of
/// `(coefficient, level, cell)` terms.
fn terms(b: u32, j: u32, i: u32, k: u128) -> [(i64, u32, u128); 2] {
    [(b as i64, j, b as u128 * k + i as u128), (-1, j - 1, k)]
}

/// `b^L ⟨1_{E^{l1}_{c1}}, 1_{E^{l2}_{c2}}⟩` with `L ≥ max(l1, l2)`.
fn scaled_overlap(b: u32, top: u32, (l1, c1): (u32, u128), (l2, c2): (u32, u128)) -> i64 {
    let (fine, coarse) = if l1 >= l2 { ((l1, c1), (l2, c2)) } else { ((l2, c2), (l1, c1)) };
    if fine.1 / pow128(b, fine.0 - coarse.0) == coarse.1 {
        pow128(b, top - fine.0) as i64
    } else {
        0
    }
}

/// Integer `S` with `⟨ψ^j_{i,k}, ψ^{j'}_{i',k'}⟩ = b^{(j + j')/2 - 2 - L} S`,
/// `L = max(j, j')`.
fn gram_integer(b: u32, a: (u32, u32, u128), c: (u32, u32, u128)) -> i64 {
    let top = a.0.max(c.0);
    let mut s = 0i64;
    for (ca, la, xa) in terms(b, a.0, a.1, a.2) {
        for (cc, lc, xc) in terms(b, c.0, c.1, c.2) {
            s += ca * cc * scaled_overlap(b, top, (la, xa), (lc, xc));
        }
    }
    s
}

fn check_univariate(b: u32, j: u32, i: u32, k: u128) -> Result<()> {
    if b < 2 {
        return Err(Error::InvalidBase(b));
    }
    if j == 0 || i >= b || k >= pow128(b, j - 1) {
        return Err(Error::InvalidIndex(format!("(j, i, k) = ({j}, {i}, {k}) for base {b}")));
    }
    Ok(())
}

/// Exact Gram entry `⟨ψ^j_{i,k}, ψ^{j'}_{i',k'}⟩` for `j, j' ≥ 1`.
pub fn gram_entry(b: u32, a: (u32, u32, u128), c: (u32, u32, u128)) -> Result<QSqrtB> {
    check_univariate(b, a.0, a.1, a.2)?;
    check_univariate(b, c.0, c.1, c.2)?;
    let s = gram_integer(b, a, c);
    let top = a.0.max(c.0) as i64;
    let half = a.0 as i64 + c.0 as i64 - 4 - 2 * top;
    Ok(QSqrtB::with_half_power(b, BigRational::from_integer(s.into()), half))
}

/// Outcome of [`frame_check`].
#[derive(Clone, Debug, PartialEq)]
pub struct FrameReport {
    pub base: u32,
    pub max_level: u32,
    /// Number of `(j, k, x-cell)` triples tested for the vanishing sum.
    pub sum_checks: usize,
    /// Number of ordered pairs of wavelets whose Gram entry was tested.
    pub gram_checks: usize,
    /// Largest deviation from either identity, exact.
    pub max_deviation: QSqrtB,
    /// First failing case, if any.
    pub failure: Option<String>,
}

impl FrameReport {
    pub fn exact(&self) -> bool {
        self.max_deviation.is_zero()
    }
}

/// Checks both identities for every `1 ≤ j ≤ max_level`, every `k`, `i`, on
/// every grid cell of level `precision` (at least `max_level`).
pub fn frame_check(b: u32, max_level: u32, precision: u32) -> Result<FrameReport> {
    if b < 2 {
        return Err(Error::InvalidBase(b));
    }
    if precision < max_level {
        return Err(Error::Precondition(format!(
            "grid precision {precision} below wavelet level {max_level}"
        )));
    }
    let bl = b as u128;
    let mut worst = QSqrtB::zero(b);
    let mut failure = None;
    let mut sum_checks = 0usize;
    for j in 1..=max_level {
        for k in 0..pow128(b, j - 1) {
            for x in 0..pow128(b, precision) {
                let cell = x / pow128(b, precision - j);
                let total: i64 = if cell / bl == k {
                    (0..b).map(|i| if (cell % bl) as u32 == i { b as i64 - 1 } else { -1 }).sum()
                } else {
                    0
                };
                sum_checks += 1;
                if total != 0 {
                    let dev = QSqrtB::with_half_power(
                        b,
                        BigRational::from_integer(total.abs().into()),
                        j as i64 - 2,
                    );
                    failure.get_or_insert_with(|| format!("sum identity fails at j={j}, k={k}, cell {x}"));
                    if dev > worst {
                        worst = dev;
                    }
                }
            }
        }
    }

    let mut funcs = Vec::new();
    for j in 1..=max_level {
        for k in 0..pow128(b, j - 1) {
            for i in 0..b {
                funcs.push((j, i, k));
            }
        }
    }
    let mut gram_checks = 0usize;
    for &a in &funcs {
        for &c in &funcs {
            let s = gram_integer(b, a, c);
            let expected = if a.0 == c.0 && a.2 == c.2 {
                b as i64 * if a.1 == c.1 { b as i64 - 1 } else { -1 }
            } else {
                0
            };
            gram_checks += 1;
            if s != expected {
                let top = a.0.max(c.0) as i64;
                let half = a.0 as i64 + c.0 as i64 - 4 - 2 * top;
                let dev = QSqrtB::with_half_power(b, BigRational::from_integer((s - expected).abs().into()), half);
                failure.get_or_insert_with(|| format!("Gram identity fails for {a:?} and {c:?}"));
                if dev > worst {
                    worst = dev;
                }
            }
        }
    }
    Ok(FrameReport { base: b, max_level, sum_checks, gram_checks, max_deviation: worst, failure })
}
