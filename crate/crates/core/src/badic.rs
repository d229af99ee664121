//! Exact base-b points and elementary intervals.
//!
//! A [`BadicPoint`] stores each coordinate as an integer numerator over
//! `b^precision`, which is the same information as its `precision` base-b
//! digits. All membership questions are answered by integer truncation of
//! those digits, never by floating-point floors.

use std::cmp::Ordering;

use crate::combinatorics::{checked_pow, pow128};
use crate::{Error, Result};

/// Checks `b >= 2` and that `b^precision` fits in 64 bits.
pub fn check_base(base: u32, precision: u32) -> Result<u64> {
    if base < 2 {
        return Err(Error::InvalidBase(base));
    }
    checked_pow(base, precision).ok_or(Error::PrecisionTooLarge { base, precision })
}

/// Largest precision whose denominator `b^m` fits in 64 bits.
pub fn max_precision(base: u32) -> u32 {
    let mut m = 0;
    while checked_pow(base, m + 1).is_some() {
        m += 1;
    }
    m
}

/// A point of `[0,1)^s` with coordinates `numerator / b^precision`.
#[derive(Clone, Debug)]
pub struct BadicPoint {
    base: u32,
    precision: u32,
    coords: Vec<u64>,
}

impl BadicPoint {
    /// Builds a point from per-coordinate numerators over `b^m`.
    pub fn from_numerators(numerators: &[u64], base: u32, precision: u32) -> Result<Self> {
        let denom = check_base(base, precision)?;
        if let Some(&value) = numerators.iter().find(|&&v| v >= denom) {
            return Err(Error::NumeratorOutOfRange { value, base, precision });
        }
        Ok(Self { base, precision, coords: numerators.to_vec() })
    }

    /// Builds a point from digit strings, most significant digit first. All
    /// coordinates must carry the same number of digits.
    pub fn from_digits(digits: &[Vec<u32>], base: u32) -> Result<Self> {
        let precision = digits.first().map_or(0, |d| d.len() as u32);
        check_base(base, precision)?;
        let mut coords = Vec::with_capacity(digits.len());
        for d in digits {
            if d.len() as u32 != precision {
                return Err(Error::DimensionMismatch {
                    expected: precision as usize,
                    found: d.len(),
                });
            }
            let mut acc = 0u64;
            for &digit in d {
                if digit >= base {
                    return Err(Error::DigitOutOfRange { digit, base });
                }
                acc = acc * base as u64 + digit as u64;
            }
            coords.push(acc);
        }
        Ok(Self { base, precision, coords })
    }

    /// Snaps real coordinates in `[0,1)` onto the grid of precision `m` by
    /// truncation: `floor(x * b^m)`. Values outside `[0,1)` are rejected.
    pub fn snap(x: &[f64], base: u32, precision: u32) -> Result<Self> {
        let denom = check_base(base, precision)?;
        let mut coords = Vec::with_capacity(x.len());
        for &v in x {
            if !(0.0..1.0).contains(&v) {
                return Err(Error::InvalidParameter(format!("coordinate {v} outside [0,1)")));
            }
            let scaled = (v * denom as f64).floor();
            coords.push((scaled as u64).min(denom - 1));
        }
        Ok(Self { base, precision, coords })
    }

    /// The origin in `s` dimensions.
    pub fn origin(dim: usize, base: u32, precision: u32) -> Result<Self> {
        check_base(base, precision)?;
        Ok(Self { base, precision, coords: vec![0; dim] })
    }

    pub fn base(&self) -> u32 {
        self.base
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn numerators(&self) -> &[u64] {
        &self.coords
    }

    pub fn numerator(&self, coord: usize) -> u64 {
        self.coords[coord]
    }

    /// Digits of one coordinate, most significant first.
    pub fn digits(&self, coord: usize) -> Vec<u32> {
        let b = self.base as u64;
        let mut v = self.coords[coord];
        let mut out = vec![0u32; self.precision as usize];
        for slot in out.iter_mut().rev() {
            *slot = (v % b) as u32;
            v /= b;
        }
        out
    }

    /// Floating-point value of one coordinate.
    pub fn value(&self, coord: usize) -> f64 {
        self.coords[coord] as f64 / (self.base as f64).powi(self.precision as i32)
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.dim()).map(|c| self.value(c)).collect()
    }

    /// `floor(x_l * b^level)` by digit truncation (zero-padding past the
    /// stored precision).
    pub fn cell(&self, coord: usize, level: u32) -> u128 {
        cell_of(self.coords[coord], self.base, self.precision, level)
    }

    /// Index `k` of the elementary interval `E^j_k` containing this point.
    pub fn locate(&self, j: &[u32]) -> Vec<u128> {
        assert_eq!(j.len(), self.dim(), "level vector dimension mismatch");
        j.iter().enumerate().map(|(c, &level)| self.cell(c, level)).collect()
    }

    /// Coordinates of the reflected point `1 - x` (may equal 1).
    pub fn reflect_values(&self) -> Vec<f64> {
        self.values().into_iter().map(|v| 1.0 - v).collect()
    }
}

/// Cell index of numerator `num / b^precision` at `level`.
pub fn cell_of(num: u64, base: u32, precision: u32, level: u32) -> u128 {
    if level <= precision {
        (num / checked_pow(base, precision - level).expect("checked at construction")) as u128
    } else {
        num as u128 * pow128(base, level - precision)
    }
}

impl PartialEq for BadicPoint {
    fn eq(&self, other: &Self) -> bool {
        if self.base != other.base || self.dim() != other.dim() {
            return false;
        }
        let p = self.precision.max(other.precision);
        self.coords
            .iter()
            .zip(&other.coords)
            .all(|(&a, &b)| cell_of(a, self.base, self.precision, p) == cell_of(b, other.base, other.precision, p))
    }
}

impl Eq for BadicPoint {}

impl PartialOrd for BadicPoint {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for BadicPoint {
    fn cmp(&self, other: &Self) -> Ordering {
        let p = self.precision.max(other.precision);
        let a = self.coords.iter().map(|&v| cell_of(v, self.base, self.precision, p));
        let b = other.coords.iter().map(|&v| cell_of(v, other.base, other.precision, p));
        a.cmp(b)
    }
}

/// The half-open box `E^j_k = prod_l [k_l b^{-j_l}, (k_l + 1) b^{-j_l})`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ElementaryInterval {
    pub base: u32,
    pub j: Vec<u32>,
    pub k: Vec<u128>,
}

impl ElementaryInterval {
    pub fn new(base: u32, j: Vec<u32>, k: Vec<u128>) -> Result<Self> {
        check_base(base, 0)?;
        if j.len() != k.len() {
            return Err(Error::DimensionMismatch { expected: j.len(), found: k.len() });
        }
        for (&jl, &kl) in j.iter().zip(&k) {
            if kl >= pow128(base, jl) {
                return Err(Error::InvalidIndex(format!("k={kl} out of range for level {jl}")));
            }
        }
        Ok(Self { base, j, k })
    }

    pub fn volume(&self) -> f64 {
        (self.base as f64).powi(-(self.j.iter().sum::<u32>() as i32))
    }

    pub fn contains(&self, p: &BadicPoint) -> bool {
        p.base() == self.base && p.dim() == self.j.len() && p.locate(&self.j) == self.k
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pt(nums: &[u64], b: u32, m: u32) -> BadicPoint {
        BadicPoint::from_numerators(nums, b, m).unwrap()
    }

    #[test]
    fn point_from_rational_examples() {
        assert_eq!(pt(&[0], 2, 1).value(0), 0.0);
        assert_eq!(pt(&[1], 2, 1).value(0), 0.5);
        let p = pt(&[3, 1], 2, 2);
        assert_eq!(p.values(), vec![0.75, 0.25]);
        assert_eq!(p.digits(0), vec![1, 1]);
        assert_eq!(p.digits(1), vec![0, 1]);
    }

    #[test]
    fn point_from_rational_errors() {
        assert!(matches!(
            BadicPoint::from_numerators(&[4], 2, 2),
            Err(Error::NumeratorOutOfRange { .. })
        ));
        assert!(matches!(BadicPoint::from_numerators(&[0], 1, 2), Err(Error::InvalidBase(1))));
        assert!(matches!(
            BadicPoint::from_numerators(&[0], 2, 64),
            Err(Error::PrecisionTooLarge { .. })
        ));
    }

    #[test]
    fn locate_examples() {
        assert_eq!(pt(&[1], 2, 1).locate(&[1]), vec![1]);
        assert_eq!(pt(&[0], 2, 1).locate(&[3]), vec![0]);
        assert_eq!(pt(&[3, 1], 2, 2).locate(&[1, 2]), vec![1, 1]);
        // zero padding past the stored precision
        assert_eq!(pt(&[1], 2, 1).locate(&[3]), vec![4]);
    }

    #[test]
    fn interval_contains_examples() {
        let all = ElementaryInterval::new(2, vec![0], vec![0]).unwrap();
        assert!(all.contains(&pt(&[(1 << 20) - 1], 2, 20)));
        let left = ElementaryInterval::new(2, vec![1], vec![0]).unwrap();
        assert!(!left.contains(&pt(&[1], 2, 1)));
        let e = ElementaryInterval::new(2, vec![1, 1], vec![0, 1]).unwrap();
        assert!(e.contains(&pt(&[1, 2], 2, 2)));
        assert!(ElementaryInterval::new(2, vec![1], vec![2]).is_err());
    }

    #[test]
    fn equality_zero_pads() {
        assert_eq!(pt(&[1], 2, 1), pt(&[4], 2, 3));
        assert_ne!(pt(&[1], 2, 1), pt(&[5], 2, 3));
    }

    #[test]
    fn snap_truncates() {
        let p = BadicPoint::snap(&[0.5, 0.999], 2, 3).unwrap();
        assert_eq!(p.numerators(), &[4, 7]);
        assert!(BadicPoint::snap(&[1.0], 2, 3).is_err());
    }

    proptest! {
        #[test]
        fn partition_and_refinement(num in 0u64..3u64.pow(6), level in 0u32..9, extra in 0u32..3) {
            let p = pt(&[num], 3, 6);
            let k = p.locate(&[level])[0];
            let e = ElementaryInterval::new(3, vec![level], vec![k]).unwrap();
            prop_assert!(e.contains(&p));
            if k + 1 < pow128(3, level) {
                let other = ElementaryInterval::new(3, vec![level], vec![k + 1]).unwrap();
                prop_assert!(!other.contains(&p));
            }
            let finer = p.locate(&[level + extra])[0];
            let scale = pow128(3, extra);
            prop_assert!(finer >= k * scale && finer < (k + 1) * scale);
        }

        #[test]
        fn digits_round_trip(nums in proptest::collection::vec(0u64..5u64.pow(7), 1..4)) {
            let p = pt(&nums, 5, 7);
            let digits: Vec<Vec<u32>> = (0..p.dim()).map(|c| p.digits(c)).collect();
            let q = BadicPoint::from_digits(&digits, 5).unwrap();
            prop_assert_eq!(q.numerators(), &nums[..]);
        }
    }
}
