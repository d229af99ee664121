//! Level-wise Haar analysis of cell masses.
//!
//! On a level vector `j`, every wavelet `Ψ^j_{i,k}` is constant on the level-`j`
//! cells `c = b·k + r` of its support and equals
//! `b^{|j|/2 - J} Π_ℓ (b·δ(r_ℓ, i_ℓ) - 1)` there, `J` being the number of
//! coordinates with `j_ℓ ≥ 1`. Given the masses `M(c) = ∫_{E^j_c} f`, the
//! integer-weighted sums `T(k, i) = Σ_r M(b·k + r) Π_ℓ (b·δ(r_ℓ, i_ℓ) - 1)`
//! come from the separable in-place map `x_r ← b·x_r - Σ_r' x_r'` along each
//! active axis, and `⟨f, Ψ^j_{i,k}⟩ = b^{|j|/2 - J} T(k, i)`.

use std::ops::{Add, Mul, Sub};

use num_rational::BigRational;
use num_traits::Zero;

use crate::combinatorics::pow128;
use crate::haar::exact::rational_pow;
use crate::nets::PointSet;
use crate::{Error, Result};

/// Arithmetic needed by the level transform.
pub trait Scalar: Clone + Zero + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> {
    fn from_i64(v: i64) -> Self;
    /// `self · b^e`.
    fn mul_pow(self, b: u32, e: i64) -> Self;
}

impl Scalar for f64 {
    fn from_i64(v: i64) -> Self {
        v as f64
    }
    fn mul_pow(self, b: u32, e: i64) -> Self {
        self * (b as f64).powi(e as i32)
    }
}

impl Scalar for i64 {
    fn from_i64(v: i64) -> Self {
        v
    }
    fn mul_pow(self, b: u32, e: i64) -> Self {
        assert!(e >= 0, "integer scaling by a negative power");
        self * (b as i64).pow(e as u32)
    }
}

impl Scalar for BigRational {
    fn from_i64(v: i64) -> Self {
        BigRational::from_integer(v.into())
    }
    fn mul_pow(self, b: u32, e: i64) -> Self {
        self * rational_pow(b, e)
    }
}

/// Number of coordinates with `j_ℓ ≥ 1`.
pub fn active_count(j: &[u32]) -> usize {
    j.iter().filter(|&&l| l > 0).count()
}

/// Exponent `h` with `⟨f, Ψ^j_{i,k}⟩ = b^{h/2} T(k, i)`.
pub fn half_exponent(j: &[u32]) -> i64 {
    j.iter().map(|&l| l as i64).sum::<i64>() - 2 * active_count(j) as i64
}

/// Applies the separable Haar map to a row-major array (first axis most
/// significant). Axes flagged inactive are left untouched; active axes must
/// have an extent divisible by `b`.
pub fn transform_in_place<T: Scalar>(data: &mut [T], extents: &[usize], active: &[bool], b: usize) {
    let total: usize = extents.iter().product();
    assert_eq!(total, data.len(), "extent product does not match data length");
    let bt = T::from_i64(b as i64);
    let mut chunk = total;
    for (axis, &ext) in extents.iter().enumerate() {
        let stride = chunk / ext;
        if active[axis] {
            debug_assert_eq!(ext % b, 0);
            for start in (0..total).step_by(chunk) {
                for blk in 0..ext / b {
                    for inner in 0..stride {
                        let base = start + blk * b * stride + inner;
                        let mut sum = T::zero();
                        for r in 0..b {
                            sum = sum + data[base + r * stride].clone();
                        }
                        for r in 0..b {
                            let slot = &mut data[base + r * stride];
                            *slot = bt.clone() * slot.clone() - sum.clone();
                        }
                    }
                }
            }
        }
        chunk = stride;
    }
}

/// Transforms a dense array of level-`j` cell masses into the sums `T(k, i)`,
/// stored at cell `b·k + i` in each active coordinate.
pub fn analyze_masses<T: Scalar>(b: u32, j: &[u32], masses: &mut [T]) {
    let extents: Vec<usize> = j.iter().map(|&l| pow128(b, l) as usize).collect();
    let active: Vec<bool> = j.iter().map(|&l| l > 0).collect();
    transform_in_place(masses, &extents, &active, b as usize);
}

/// One occupied support block of a point set at a fixed level vector.
#[derive(Clone, Debug)]
pub struct Block {
    /// Mixed-radix block index over the active coordinates.
    pub key: u128,
    /// `T(k, i)` for every `i` in the active coordinates (mixed radix, first
    /// active coordinate most significant), computed from raw point counts.
    pub sums: Vec<i64>,
}

/// Sparse analysis of the counting measure of a point set at level `j`.
#[derive(Clone, Debug)]
pub struct LevelBlocks {
    pub base: u32,
    pub j: Vec<u32>,
    pub active: Vec<usize>,
    pub blocks: Vec<Block>,
}

impl LevelBlocks {
    /// Splits a block key into the per-coordinate `k` (zero where `j_ℓ = 0`).
    pub fn unpack_key(&self, mut key: u128) -> Vec<u128> {
        let mut k = vec![0u128; self.j.len()];
        for &c in self.active.iter().rev() {
            let radix = pow128(self.base, self.j[c] - 1);
            k[c] = key % radix;
            key /= radix;
        }
        k
    }

    /// Splits a local offset into the per-coordinate `i`.
    pub fn unpack_offset(&self, mut offset: usize) -> Vec<u32> {
        let b = self.base as usize;
        let mut i = vec![0u32; self.j.len()];
        for &c in self.active.iter().rev() {
            i[c] = (offset % b) as u32;
            offset /= b;
        }
        i
    }
}

/// Groups the points of `ps` into the supports `E^{j-1}_k` they occupy and
/// transforms the per-block counts.
pub fn point_level_blocks(ps: &PointSet, j: &[u32]) -> Result<LevelBlocks> {
    if j.len() != ps.dim() {
        return Err(Error::DimensionMismatch { expected: ps.dim(), found: j.len() });
    }
    let b = ps.base();
    let active: Vec<usize> = (0..j.len()).filter(|&c| j[c] > 0).collect();
    let coarse_bits: f64 = active.iter().map(|&c| (j[c] - 1) as f64).sum::<f64>() * (b as f64).log2();
    if coarse_bits > 126.0 {
        return Err(Error::Budget(format!("level vector {j:?} too fine for 128-bit cell keys")));
    }
    let bl = b as u128;
    let local = (b as usize).pow(active.len() as u32);
    let mut keyed: Vec<(u128, usize)> = ps
        .points()
        .iter()
        .map(|p| {
            let mut key = 0u128;
            let mut off = 0usize;
            for &c in &active {
                let cell = p.cell(c, j[c]);
                key = key * pow128(b, j[c] - 1) + cell / bl;
                off = off * b as usize + (cell % bl) as usize;
            }
            (key, off)
        })
        .collect();
    keyed.sort_unstable();
    let extents = vec![b as usize; active.len()];
    let flags = vec![true; active.len()];
    let mut blocks = Vec::new();
    let mut idx = 0;
    while idx < keyed.len() {
        let key = keyed[idx].0;
        let mut sums = vec![0i64; local];
        while idx < keyed.len() && keyed[idx].0 == key {
            sums[keyed[idx].1] += 1;
            idx += 1;
        }
        transform_in_place(&mut sums, &extents, &flags, b as usize);
        blocks.push(Block { key, sums });
    }
    Ok(LevelBlocks { base: b, j: j.to_vec(), active, blocks })
}
