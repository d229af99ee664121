//! Point sets, net generators and the (t,m,s)-net verifier.

use crate::badic::{check_base, max_precision, BadicPoint};
use crate::combinatorics::{binomial_mod, compositions, exact_log, is_prime, pow128};
use crate::{par, Error, Result};

/// A multiset of b-adic points sharing base, precision and dimension.
#[derive(Clone, Debug, PartialEq)]
pub struct PointSet {
    base: u32,
    precision: u32,
    dim: usize,
    points: Vec<BadicPoint>,
}

impl PointSet {
    pub fn new(base: u32, precision: u32, dim: usize, points: Vec<BadicPoint>) -> Result<Self> {
        check_base(base, precision)?;
        if dim == 0 {
            return Err(Error::InvalidParameter("dimension must be at least 1".into()));
        }
        for p in &points {
            if p.base() != base || p.precision() != precision {
                return Err(Error::InvalidParameter(
                    "all points must share base and precision".into(),
                ));
            }
            if p.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: p.dim() });
            }
        }
        Ok(Self { base, precision, dim, points })
    }

    /// Builds a set from rows of numerators over `b^precision`.
    pub fn from_numerators(base: u32, precision: u32, rows: &[Vec<u64>]) -> Result<Self> {
        let dim = rows.first().map_or(1, |r| r.len());
        let points = rows
            .iter()
            .map(|r| BadicPoint::from_numerators(r, base, precision))
            .collect::<Result<Vec<_>>>()?;
        Self::new(base, precision, dim, points)
    }

    /// Snaps real points onto the grid of the given precision.
    pub fn from_f64(base: u32, precision: u32, rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.first().map_or(1, |r| r.len());
        let points = rows
            .iter()
            .map(|r| BadicPoint::snap(r, base, precision))
            .collect::<Result<Vec<_>>>()?;
        Self::new(base, precision, dim, points)
    }

    /// `count` independent uniform points at the finest precision for `base`.
    pub fn uniform_random(base: u32, dim: usize, count: usize, seed: u64) -> Result<Self> {
        use rand::{Rng, SeedableRng};
        let precision = max_precision(base);
        let denom = check_base(base, precision)?;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let rows: Vec<Vec<u64>> = (0..count)
            .map(|_| (0..dim).map(|_| rng.random_range(0..denom)).collect())
            .collect();
        Self::from_numerators(base, precision, &rows)
    }

    pub fn base(&self) -> u32 {
        self.base
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[BadicPoint] {
        &self.points
    }

    /// `m` with `|P| = b^m`, if the cardinality is a power of the base.
    pub fn net_exponent(&self) -> Option<u32> {
        exact_log(self.base, self.points.len() as u64)
    }

    fn require_net_exponent(&self) -> Result<u32> {
        self.net_exponent().ok_or_else(|| {
            let mut expected = 1u64;
            while expected < self.points.len() as u64 {
                expected = expected.saturating_mul(self.base as u64);
            }
            Error::NotNetSized { expected, found: self.points.len() }
        })
    }

    /// Coordinates as floating-point rows.
    pub fn to_f64(&self) -> Vec<Vec<f64>> {
        self.points.iter().map(|p| p.values()).collect()
    }

    /// Mixed-radix cell index of every point at level vector `j`; the first
    /// coordinate is the most significant digit group.
    pub fn cell_indices(&self, j: &[u32]) -> Vec<u128> {
        self.points
            .iter()
            .map(|p| {
                j.iter().enumerate().fold(0u128, |acc, (c, &level)| {
                    acc * pow128(self.base, level) + p.cell(c, level)
                })
            })
            .collect()
    }
}

/// The first `b^m` points of the van der Corput sequence in base `b`.
pub fn van_der_corput(base: u32, m: u32) -> Result<PointSet> {
    let n = check_base(base, m)?;
    let rows: Vec<Vec<u64>> = (0..n).map(|i| vec![radical_inverse_numerator(i, base, m)]).collect();
    PointSet::from_numerators(base, m, &rows)
}

/// Digit reversal of `n` over `m` base-b digits: the radical inverse scaled by `b^m`.
pub fn radical_inverse_numerator(n: u64, base: u32, m: u32) -> u64 {
    let b = base as u64;
    let mut n = n;
    let mut acc = 0u64;
    for _ in 0..m {
        acc = acc * b + n % b;
        n /= b;
    }
    acc
}

/// Generator matrices of a digital net: `s` matrices of size `m x m` over `Z_b`.
///
/// Point `n = sum_r a_r b^r` (least significant digit first) has coordinate
/// `l` with digit vector `y = C_l a mod b`, where `y_0` is the most significant
/// digit of the coordinate: `x_l = sum_r y_r b^{-r-1}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeneratorMatrices {
    pub base: u32,
    pub m: usize,
    pub matrices: Vec<Vec<Vec<u32>>>,
}

impl GeneratorMatrices {
    pub fn new(base: u32, m: usize, matrices: Vec<Vec<Vec<u32>>>) -> Result<Self> {
        if !is_prime(base) {
            return Err(Error::NotPrime { base });
        }
        if matrices.is_empty() {
            return Err(Error::InvalidParameter("at least one generator matrix".into()));
        }
        for mat in &matrices {
            if mat.len() != m {
                return Err(Error::DimensionMismatch { expected: m, found: mat.len() });
            }
            for row in mat {
                if row.len() != m {
                    return Err(Error::DimensionMismatch { expected: m, found: row.len() });
                }
            }
        }
        let matrices = matrices
            .into_iter()
            .map(|mat| mat.into_iter().map(|row| row.into_iter().map(|v| v % base).collect()).collect())
            .collect();
        Ok(Self { base, m, matrices })
    }

    pub fn dim(&self) -> usize {
        self.matrices.len()
    }

    /// Faure matrices: `C_l = P^{l-1}` with `P[r][c] = binom(c, r) mod b`,
    /// so `P^k[r][c] = binom(c, r) k^{c-r} mod b`.
    pub fn faure(base: u32, m: usize, s: usize) -> Result<Self> {
        if !is_prime(base) {
            return Err(Error::NotPrime { base });
        }
        if s == 0 || s > base as usize {
            return Err(Error::InvalidParameter(format!(
                "Faure nets need 1 <= s <= b, got s={s}, b={base}"
            )));
        }
        let b = base as u64;
        let matrices = (0..s as u64)
            .map(|power| {
                (0..m as u64)
                    .map(|r| {
                        (0..m as u64)
                            .map(|c| {
                                if c < r {
                                    0
                                } else {
                                    let scale = pow_mod(power, c - r, b);
                                    (binomial_mod(c, r, b) * scale % b) as u32
                                }
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect();
        Self::new(base, m, matrices)
    }
}

fn pow_mod(base: u64, exp: u64, modulus: u64) -> u64 {
    // 0^0 = 1 gives the identity for the first coordinate
    let mut acc = 1 % modulus;
    for _ in 0..exp {
        acc = acc * base % modulus;
    }
    acc
}

/// Generates the `b^m` points of a digital net.
pub fn digital_net(g: &GeneratorMatrices) -> Result<PointSet> {
    let m = g.m as u32;
    let n = check_base(g.base, m)?;
    let b = g.base as u64;
    let rows: Vec<Vec<u64>> = par::map_range(n as usize, |idx| {
        let mut digits = vec![0u64; g.m];
        let mut rest = idx as u64;
        for d in digits.iter_mut() {
            *d = rest % b;
            rest /= b;
        }
        g.matrices
            .iter()
            .map(|mat| {
                mat.iter().fold(0u64, |acc, row| {
                    let y = row.iter().zip(&digits).map(|(&c, &a)| c as u64 * a).sum::<u64>() % b;
                    acc * b + y
                })
            })
            .collect()
    });
    PointSet::from_numerators(g.base, m, &rows)
}

/// A `(0,m,s)`-net from Faure's construction (`b` prime, `s <= b`).
pub fn faure_net(base: u32, m: u32, s: usize) -> Result<PointSet> {
    digital_net(&GeneratorMatrices::faure(base, m as usize, s)?)
}

/// Outcome of checking the net property for one `t`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NetCertificate {
    pub base: u32,
    pub m: u32,
    pub s: usize,
    pub t: u32,
    pub verified: bool,
    /// First underfull elementary interval (shape-major, then cell order).
    /// Counts sum to `b^m`, so any mismatch implies an underfull cell.
    pub witness: Option<NetWitness>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NetWitness {
    pub j: Vec<u32>,
    pub k: Vec<u128>,
    pub count: u64,
}

/// Checks that every elementary interval with `|j| = m - t` holds exactly `b^t`
/// points. Coarser intervals are unions of these, so this suffices.
pub fn verify_net(p: &PointSet, t: u32) -> Result<NetCertificate> {
    let m = p.require_net_exponent()?;
    if t > m {
        return Err(Error::InvalidParameter(format!("t={t} exceeds m={m}")));
    }
    let level = m - t;
    let expected = (p.base() as u64).pow(t);
    let shapes = compositions(level, p.dim());
    let witnesses = par::map_collect(&shapes, |j| first_bad_cell(p, j, level, expected));
    let witness = witnesses.into_iter().flatten().next();
    Ok(NetCertificate {
        base: p.base(),
        m,
        s: p.dim(),
        t,
        verified: witness.is_none(),
        witness,
    })
}

fn first_bad_cell(p: &PointSet, j: &[u32], level: u32, expected: u64) -> Option<NetWitness> {
    let cells = pow128(p.base(), level) as usize;
    let mut counts = vec![0u64; cells];
    for idx in p.cell_indices(j) {
        counts[idx as usize] += 1;
    }
    let bad = counts.iter().position(|&c| c < expected)?;
    let mut k = vec![0u128; j.len()];
    let mut rest = bad as u128;
    for (c, &jl) in j.iter().enumerate().rev() {
        let radix = pow128(p.base(), jl);
        k[c] = rest % radix;
        rest /= radix;
    }
    Some(NetWitness { j: j.to_vec(), k, count: counts[bad] })
}

/// The smallest `t` for which `P` is a `(t,m,s)`-net.
pub fn t_value(p: &PointSet) -> Result<u32> {
    let m = p.require_net_exponent()?;
    for t in 0..m {
        if verify_net(p, t)?.verified {
            return Ok(t);
        }
    }
    Ok(m)
}
