//! Equal-weight QMC rules and the exactness check on approximation spaces.

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::combinatorics::level_vectors;
use crate::haar::analysis::{half_exponent, point_level_blocks};
use crate::haar::{PiecewiseConstant, QSqrtB, WaveletIndex};
use crate::nets::PointSet;
use crate::{par, Error, Result};

/// `Q_P(f) = |P|^{-1} Σ_{p ∈ P} f(p)` for a function of real coordinates.
pub fn qmc<F>(p: &PointSet, f: F) -> f64
where
    F: Fn(&[f64]) -> f64 + Sync + Send,
{
    let values = par::map_collect(p.points(), |x| f(&x.values()));
    par::pairwise_sum(&values) / p.len() as f64
}

/// `Q_P(f)` for a piecewise constant `f`, read off cell by cell.
pub fn qmc_pc(p: &PointSet, f: &PiecewiseConstant<f64>) -> Result<f64> {
    check_pc(p, f.base(), f.dim())?;
    let values: Vec<f64> = p.points().iter().map(|x| f.value_at(x)).collect();
    Ok(par::pairwise_sum(&values) / p.len() as f64)
}

/// `Q_P(f)` in exact rational arithmetic.
pub fn qmc_pc_exact(p: &PointSet, f: &PiecewiseConstant<BigRational>) -> Result<BigRational> {
    check_pc(p, f.base(), f.dim())?;
    let sum = p
        .points()
        .iter()
        .fold(BigRational::from_integer(0.into()), |acc, x| acc + f.value_at(x));
    Ok(sum / BigRational::from_integer(BigInt::from(p.len())))
}

fn check_pc(p: &PointSet, base: u32, dim: usize) -> Result<()> {
    if base != p.base() {
        return Err(Error::InvalidParameter(format!(
            "function base {base} differs from point set base {}",
            p.base()
        )));
    }
    if dim != p.dim() {
        return Err(Error::DimensionMismatch { expected: p.dim(), found: dim });
    }
    Ok(())
}

/// Integer `Σ_{p ∈ P} Ψ(p) / b^{h/2}` obtained by counting points per cell.
fn wavelet_point_sum(p: &PointSet, idx: &WaveletIndex) -> Result<i64> {
    if idx.dim() != p.dim() {
        return Err(Error::DimensionMismatch { expected: p.dim(), found: idx.dim() });
    }
    let idx = WaveletIndex::new(p.base(), idx.j().to_vec(), idx.k().to_vec(), idx.i().to_vec())?;
    let support = idx.support(p.base());
    let b = p.base() as u128;
    let mut total = 0i64;
    for x in p.points() {
        if !support.contains(x) {
            continue;
        }
        let mut factor = 1i64;
        for c in 0..idx.dim() {
            if idx.j()[c] == 0 {
                continue;
            }
            let r = (x.cell(c, idx.j()[c]) % b) as u32;
            factor *= if r == idx.i()[c] { p.base() as i64 - 1 } else { -1 };
        }
        total += factor;
    }
    Ok(total)
}

/// `Q_P(Ψ^j_{i,k})` in floating point.
pub fn qmc_wavelet(p: &PointSet, idx: &WaveletIndex) -> Result<f64> {
    Ok(qmc_wavelet_exact(p, idx)?.to_f64())
}

/// `Q_P(Ψ^j_{i,k})` exactly, as a value `r + s√b`.
pub fn qmc_wavelet_exact(p: &PointSet, idx: &WaveletIndex) -> Result<QSqrtB> {
    let total = wavelet_point_sum(p, idx)?;
    let r = BigRational::new(total.into(), BigInt::from(p.len()));
    Ok(QSqrtB::with_half_power(p.base(), r, half_exponent(idx.j())))
}

/// Outcome of [`exactness_report`].
#[derive(Clone, Debug, PartialEq)]
pub struct ExactnessReport {
    pub m: u32,
    pub t: u32,
    /// Highest tested level `L = m - t`.
    pub level: u32,
    /// Number of wavelet indices covered (occupied and empty supports).
    pub indices: u128,
    /// `max |Q_P(Ψ) - I_s(Ψ)|` over all tested indices, exact.
    pub max_deviation: QSqrtB,
    /// An index attaining the maximum deviation, if it is nonzero.
    pub witness: Option<WaveletIndex>,
}

impl ExactnessReport {
    pub fn is_exact(&self) -> bool {
        self.max_deviation.is_zero()
    }
}

/// Tests `Q_P(Ψ) = I_s(Ψ)` for every wavelet with `|j| ≤ m - t`.
pub fn exactness_report(p: &PointSet, t: u32) -> Result<ExactnessReport> {
    let m = p.net_exponent().ok_or_else(|| Error::NotNetSized {
        expected: (p.base() as u64).pow(
            (p.len() as f64).log(p.base() as f64).ceil() as u32,
        ),
        found: p.len(),
    })?;
    if t > m {
        return Err(Error::InvalidParameter(format!("t={t} exceeds m={m}")));
    }
    let level = m - t;
    // the scaling function is integrated exactly by any equal-weight rule
    let shapes = level_vectors(1, level, p.dim());
    let per_shape = par::map_collect(&shapes, |j| -> Result<Option<(i64, WaveletIndex)>> {
        let lb = point_level_blocks(p, j)?;
        let mut best: Option<(i64, WaveletIndex)> = None;
        for blk in &lb.blocks {
            for (off, &v) in blk.sums.iter().enumerate() {
                if v != 0 && best.as_ref().is_none_or(|(b, _)| v.abs() > *b) {
                    let idx = WaveletIndex::new(p.base(), j.clone(), lb.unpack_key(blk.key), lb.unpack_offset(off))?;
                    best = Some((v.abs(), idx));
                }
            }
        }
        Ok(best)
    });
    let mut worst = QSqrtB::zero(p.base());
    let mut witness = None;
    let n = BigInt::from(p.len());
    for entry in per_shape {
        if let Some((v, idx)) = entry? {
            let dev = QSqrtB::with_half_power(
                p.base(),
                BigRational::new(v.into(), n.clone()),
                half_exponent(idx.j()),
            );
            if dev > worst {
                worst = dev;
                witness = Some(idx);
            }
        }
    }
    let indices = 1 + shapes
        .iter()
        .map(|j| crate::combinatorics::pow128(p.base(), j.iter().sum()))
        .sum::<u128>();
    Ok(ExactnessReport { m, t, level, indices, max_deviation: worst, witness })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nets::{faure_net, van_der_corput};

    fn idx(b: u32, j: &[u32], k: &[u128], i: &[u32]) -> WaveletIndex {
        WaveletIndex::new(b, j.to_vec(), k.to_vec(), i.to_vec()).unwrap()
    }

    #[test]
    fn qmc_examples() {
        let p = faure_net(3, 2, 2).unwrap();
        assert!((qmc(&p, |_| 1.0) - 1.0).abs() < 1e-15);
        let v = van_der_corput(2, 2).unwrap();
        assert_eq!(qmc(&v, |x| x[0]), 0.375);
        let half = PointSet::from_numerators(2, 1, &[vec![1]]).unwrap();
        let ind = PiecewiseConstant::new(2, 1, 1, vec![0.0, 1.0]).unwrap();
        assert_eq!(qmc_pc(&half, &ind).unwrap(), 1.0);
    }

    #[test]
    fn qmc_wavelet_examples() {
        let p = PointSet::from_numerators(2, 1, &[vec![0], vec![1]]).unwrap();
        assert_eq!(qmc_wavelet(&p, &WaveletIndex::zero(1)).unwrap(), 1.0);
        let w = idx(2, &[1], &[0], &[0]);
        assert!(qmc_wavelet_exact(&p, &w).unwrap().is_zero());
        let dup = PointSet::from_numerators(2, 1, &[vec![0], vec![0]]).unwrap();
        let v = qmc_wavelet_exact(&dup, &w).unwrap();
        assert_eq!(v, QSqrtB::with_half_power(2, BigRational::new(1.into(), 2.into()), 1));
        assert!((v.to_f64() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn wavelet_rule_matches_piecewise_rule() {
        let p = faure_net(3, 3, 2).unwrap();
        for w in [idx(3, &[2, 1], &[1, 0], &[2, 1]), idx(3, &[0, 3], &[0, 7], &[0, 0]), idx(3, &[3, 3], &[8, 4], &[1, 1])] {
            let direct = p.points().iter().fold(QSqrtB::zero(3), |a, x| a + w.eval_exact(3, x));
            let counted = qmc_wavelet_exact(&p, &w).unwrap();
            let scaled = counted * QSqrtB::from_integer(3, p.len() as i64);
            assert_eq!(direct, scaled);
        }
    }

    #[test]
    fn exactness_examples() {
        let r = exactness_report(&faure_net(2, 3, 2).unwrap(), 0).unwrap();
        assert!(r.is_exact() && r.witness.is_none());
        let origin = PointSet::from_numerators(2, 3, &vec![vec![0, 0]; 8]).unwrap();
        assert!(exactness_report(&origin, 3).unwrap().is_exact());
        let bad = PointSet::from_numerators(2, 2, &[vec![0], vec![2], vec![2], vec![3]]).unwrap();
        let r = exactness_report(&bad, 0).unwrap();
        assert!(!r.is_exact());
        assert!(r.witness.unwrap().level() <= 2);
    }
}
