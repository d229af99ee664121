//! Functions constant on the cells of a uniform b-adic grid.

use num_rational::BigRational;

use super::analysis::{self, Scalar};
use super::{half_power_f64, CoeffMap, QSqrtB, WaveletIndex};
use crate::badic::{BadicPoint, ElementaryInterval};
use crate::combinatorics::{box_level_vectors, pow128};
use crate::{Error, Result};

/// A function on `[0,1)^s` that is constant on every cell
/// `E^{(m,…,m)}_κ`; values are stored row-major with the first coordinate
/// most significant.
#[derive(Clone, Debug, PartialEq)]
pub struct PiecewiseConstant<T> {
    base: u32,
    level: u32,
    dim: usize,
    values: Vec<T>,
}

fn cell_total(base: u32, level: u32, dim: usize) -> Result<usize> {
    if base < 2 {
        return Err(Error::InvalidBase(base));
    }
    let bits = level as f64 * dim as f64 * (base as f64).log2();
    if bits > 40.0 {
        return Err(Error::Budget(format!(
            "grid with {base}^({level}*{dim}) cells is too large"
        )));
    }
    Ok(pow128(base, level * dim as u32) as usize)
}

impl<T: Scalar> PiecewiseConstant<T> {
    pub fn new(base: u32, level: u32, dim: usize, values: Vec<T>) -> Result<Self> {
        let n = cell_total(base, level, dim)?;
        if values.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: values.len() });
        }
        Ok(Self { base, level, dim, values })
    }

    pub fn constant(base: u32, level: u32, dim: usize, value: T) -> Result<Self> {
        let n = cell_total(base, level, dim)?;
        Ok(Self { base, level, dim, values: vec![value; n] })
    }

    /// Builds the function from its value on each cell multi-index.
    pub fn from_fn(base: u32, level: u32, dim: usize, f: impl Fn(&[u128]) -> T) -> Result<Self> {
        let n = cell_total(base, level, dim)?;
        let side = pow128(base, level);
        let mut cell = vec![0u128; dim];
        let mut values = Vec::with_capacity(n);
        for flat in 0..n {
            let mut rest = flat as u128;
            for c in (0..dim).rev() {
                cell[c] = rest % side;
                rest /= side;
            }
            values.push(f(&cell));
        }
        Ok(Self { base, level, dim, values })
    }

    /// The indicator of an elementary interval no finer than the grid.
    pub fn indicator(base: u32, level: u32, e: &ElementaryInterval) -> Result<Self> {
        if e.j.iter().any(|&l| l > level) {
            return Err(Error::Precondition(format!(
                "interval level {:?} finer than grid level {level}",
                e.j
            )));
        }
        Self::from_fn(base, level, e.j.len(), |cell| {
            let inside = cell
                .iter()
                .zip(&e.j)
                .zip(&e.k)
                .all(|((&c, &l), &k)| c / pow128(base, level - l) == k);
            T::from_i64(inside as i64)
        })
    }

    pub fn base(&self) -> u32 {
        self.base
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    fn flat_index(&self, cell: &[u128]) -> usize {
        let side = pow128(self.base, self.level);
        cell.iter().fold(0u128, |acc, &c| acc * side + c) as usize
    }

    /// Value at an exact point.
    pub fn value_at(&self, x: &BadicPoint) -> T {
        let cell = x.locate(&vec![self.level; self.dim]);
        self.values[self.flat_index(&cell)].clone()
    }

    /// Value on a cell multi-index of the grid.
    pub fn value_on_cell(&self, cell: &[u128]) -> T {
        self.values[self.flat_index(cell)].clone()
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(&T) -> U) -> PiecewiseConstant<U> {
        PiecewiseConstant {
            base: self.base,
            level: self.level,
            dim: self.dim,
            values: self.values.iter().map(f).collect(),
        }
    }

    /// `∫ f` over `[0,1)^s`.
    pub fn integral(&self) -> T {
        let sum = self.values.iter().cloned().fold(T::zero(), |a, v| a + v);
        sum.mul_pow(self.base, -((self.level as i64) * self.dim as i64))
    }

    /// Masses `∫_{E^j_c} f` on every level-`j` cell, row-major.
    pub fn masses(&self, j: &[u32]) -> Result<Vec<T>> {
        if j.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: j.len() });
        }
        if let Some(&l) = j.iter().find(|&&l| l > self.level) {
            return Err(Error::Precondition(format!(
                "level {l} finer than function resolution {}",
                self.level
            )));
        }
        let side = pow128(self.base, self.level) as usize;
        let mut extents = vec![side; self.dim];
        let mut data = self.values.clone();
        for c in 0..self.dim {
            let target = pow128(self.base, j[c]) as usize;
            if target == extents[c] {
                continue;
            }
            let group = extents[c] / target;
            let outer: usize = extents[..c].iter().product();
            let inner: usize = extents[c + 1..].iter().product();
            let mut next = vec![T::zero(); outer * target * inner];
            for o in 0..outer {
                for t in 0..extents[c] {
                    let src = (o * extents[c] + t) * inner;
                    let dst = (o * target + t / group) * inner;
                    for x in 0..inner {
                        next[dst + x] = next[dst + x].clone() + data[src + x].clone();
                    }
                }
            }
            extents[c] = target;
            data = next;
        }
        let scale = -((self.level as i64) * self.dim as i64);
        Ok(data.into_iter().map(|v| v.mul_pow(self.base, scale)).collect())
    }

    /// `T(k, i)` for one index, i.e. `⟨f, Ψ⟩ / b^{h/2}`.
    fn raw_coefficient(&self, idx: &WaveletIndex) -> Result<T> {
        let idx = WaveletIndex::new(self.base, idx.j().to_vec(), idx.k().to_vec(), idx.i().to_vec())?;
        let masses = self.masses(idx.j())?;
        let active: Vec<usize> = (0..self.dim).filter(|&c| idx.j()[c] > 0).collect();
        let b = self.base as u128;
        let extents: Vec<u128> = idx.j().iter().map(|&l| pow128(self.base, l)).collect();
        let mut acc = T::zero();
        let cells = (self.base as usize).pow(active.len() as u32);
        for off in 0..cells {
            let mut rest = off;
            let mut factor = 1i64;
            let mut cell = vec![0u128; self.dim];
            for &c in active.iter().rev() {
                let r = (rest % self.base as usize) as u128;
                rest /= self.base as usize;
                cell[c] = b * idx.k()[c] + r;
                factor *= if r as u32 == idx.i()[c] { self.base as i64 - 1 } else { -1 };
            }
            let flat = cell.iter().zip(&extents).fold(0u128, |a, (&c, &e)| a * e + c) as usize;
            acc = acc + T::from_i64(factor) * masses[flat].clone();
        }
        Ok(acc)
    }
}

impl PiecewiseConstant<f64> {
    /// `⟨f, Ψ^j_{i,k}⟩`.
    pub fn inner_product(&self, idx: &WaveletIndex) -> Result<f64> {
        let raw = self.raw_coefficient(idx)?;
        Ok(raw * half_power_f64(self.base, analysis::half_exponent(idx.j())))
    }

    /// All coefficients with `j_ℓ ≤ level`, dropping exact zeros.
    pub fn coefficients(&self) -> Result<CoeffMap> {
        let mut out = CoeffMap::new(self.base, self.dim);
        let b = self.base as u128;
        for j in box_level_vectors(self.level, self.dim) {
            let mut masses = self.masses(&j)?;
            analysis::analyze_masses(self.base, &j, &mut masses);
            let scale = half_power_f64(self.base, analysis::half_exponent(&j));
            let extents: Vec<u128> = j.iter().map(|&l| pow128(self.base, l)).collect();
            for (flat, &t) in masses.iter().enumerate() {
                if t == 0.0 {
                    continue;
                }
                let mut rest = flat as u128;
                let mut k = vec![0u128; self.dim];
                let mut i = vec![0u32; self.dim];
                for c in (0..self.dim).rev() {
                    let cell = rest % extents[c];
                    rest /= extents[c];
                    if j[c] > 0 {
                        k[c] = cell / b;
                        i[c] = (cell % b) as u32;
                    }
                }
                out.insert(WaveletIndex::from_parts_unchecked(j.clone(), k, i), t * scale)?;
            }
        }
        Ok(out)
    }
}

impl PiecewiseConstant<BigRational> {
    /// `⟨f, Ψ^j_{i,k}⟩` in exact arithmetic.
    pub fn inner_product_exact(&self, idx: &WaveletIndex) -> Result<QSqrtB> {
        let raw = self.raw_coefficient(idx)?;
        Ok(QSqrtB::with_half_power(self.base, raw, analysis::half_exponent(idx.j())))
    }
}
