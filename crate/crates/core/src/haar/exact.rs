//! Exact values of the form `r + s·√b` with rational `r`, `s`.
//!
//! Haar wavelet values are `b^{j/2-1}` times small integers, so every inner
//! product, cubature value and frame identity lives in this field.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QSqrtB {
    base: u32,
    rational: BigRational,
    surd: BigRational,
}

fn integer_sqrt(b: u32) -> Option<u32> {
    let r = (b as f64).sqrt().round() as u32;
    (r * r == b).then_some(r)
}

/// `b^e` as an exact rational (negative `e` allowed).
pub fn rational_pow(b: u32, e: i64) -> BigRational {
    let p = BigInt::from(b).pow(e.unsigned_abs() as u32);
    if e >= 0 {
        BigRational::from_integer(p)
    } else {
        BigRational::new(BigInt::one(), p)
    }
}

impl QSqrtB {
    pub fn zero(base: u32) -> Self {
        Self { base, rational: BigRational::zero(), surd: BigRational::zero() }
    }

    pub fn from_rational(base: u32, r: BigRational) -> Self {
        Self { base, rational: r, surd: BigRational::zero() }
    }

    pub fn from_integer(base: u32, v: i64) -> Self {
        Self::from_rational(base, BigRational::from_integer(v.into()))
    }

    /// `r · b^{half_exp / 2}`.
    pub fn with_half_power(base: u32, r: BigRational, half_exp: i64) -> Self {
        let whole = half_exp.div_euclid(2);
        let odd = half_exp.rem_euclid(2) == 1;
        let scaled = r * rational_pow(base, whole);
        let out = if odd {
            Self { base, rational: BigRational::zero(), surd: scaled }
        } else {
            Self { base, rational: scaled, surd: BigRational::zero() }
        };
        out.normalized()
    }

    fn normalized(mut self) -> Self {
        if let Some(root) = integer_sqrt(self.base) {
            if !self.surd.is_zero() {
                let extra = std::mem::replace(&mut self.surd, BigRational::zero());
                self.rational += extra * BigRational::from_integer(root.into());
            }
        }
        self
    }

    pub fn base(&self) -> u32 {
        self.base
    }

    pub fn rational_part(&self) -> &BigRational {
        &self.rational
    }

    pub fn surd_part(&self) -> &BigRational {
        &self.surd
    }

    pub fn is_zero(&self) -> bool {
        self.rational.is_zero() && self.surd.is_zero()
    }

    pub fn to_f64(&self) -> f64 {
        let r = self.rational.to_f64().unwrap_or(f64::NAN);
        let s = self.surd.to_f64().unwrap_or(f64::NAN);
        r + s * (self.base as f64).sqrt()
    }

    /// Exact absolute value; `r + s√b` with mixed signs is compared by squares.
    pub fn abs(&self) -> Self {
        if self.is_negative() {
            -self.clone()
        } else {
            self.clone()
        }
    }

    pub fn is_negative(&self) -> bool {
        let (r, s) = (&self.rational, &self.surd);
        match (r.is_negative() || r.is_zero(), s.is_negative() || s.is_zero()) {
            _ if self.is_zero() => false,
            (true, true) => true,
            (false, false) => false,
            _ => {
                // sign of r + s√b when r and s have opposite signs: compare r^2 with b s^2
                let b = BigRational::from_integer(self.base.into());
                let r2 = r * r;
                let bs2 = &b * s * s;
                if r.is_positive() {
                    r2 < bs2
                } else {
                    r2 > bs2
                }
            }
        }
    }

    fn check_base(&self, other: &Self) {
        assert_eq!(self.base, other.base, "mixing values over different bases");
    }
}

impl Add for QSqrtB {
    type Output = QSqrtB;
    fn add(self, rhs: QSqrtB) -> QSqrtB {
        self.check_base(&rhs);
        QSqrtB { base: self.base, rational: self.rational + rhs.rational, surd: self.surd + rhs.surd }
    }
}

impl Sub for QSqrtB {
    type Output = QSqrtB;
    fn sub(self, rhs: QSqrtB) -> QSqrtB {
        self + (-rhs)
    }
}

impl Neg for QSqrtB {
    type Output = QSqrtB;
    fn neg(self) -> QSqrtB {
        QSqrtB { base: self.base, rational: -self.rational, surd: -self.surd }
    }
}

impl Mul for QSqrtB {
    type Output = QSqrtB;
    fn mul(self, rhs: QSqrtB) -> QSqrtB {
        self.check_base(&rhs);
        let b = BigRational::from_integer(self.base.into());
        let rational = &self.rational * &rhs.rational + b * &self.surd * &rhs.surd;
        let surd = &self.rational * &rhs.surd + &self.surd * &rhs.rational;
        QSqrtB { base: self.base, rational, surd }
    }
}

impl PartialOrd for QSqrtB {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        if self.base != other.base {
            return None;
        }
        let diff = self.clone() - other.clone();
        Some(if diff.is_zero() {
            std::cmp::Ordering::Equal
        } else if diff.is_negative() {
            std::cmp::Ordering::Less
        } else {
            std::cmp::Ordering::Greater
        })
    }
}

impl fmt::Display for QSqrtB {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.surd.is_zero() {
            write!(f, "{}", self.rational)
        } else if self.rational.is_zero() {
            write!(f, "{}*sqrt({})", self.surd, self.base)
        } else {
            write!(f, "{} + {}*sqrt({})", self.rational, self.surd, self.base)
        }
    }
}
