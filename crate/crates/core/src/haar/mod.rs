//! The b-adic Haar frame: wavelet evaluation, exact inner products, weighted
//! sequence norms and pointwise series evaluation.
//!
//! Univariate wavelets are `ψ^0_{0,0} = 1_{[0,1)}` and, for `j ≥ 1`,
//! `ψ^j_{i,k}(x) = b^{(j-1)/2} ψ_i(b^{j-1} x - k)` with
//! `ψ_i = b^{1/2} 1_{[i/b,(i+1)/b)} - b^{-1/2} 1_{[0,1)}`. Multivariate
//! wavelets are tensor products.

pub mod analysis;
mod exact;
mod frame;
mod piecewise;

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

pub use exact::{rational_pow, QSqrtB};
pub use frame::{frame_check, gram_entry, FrameReport};
pub use piecewise::PiecewiseConstant;

use num_rational::BigRational;

use crate::badic::{BadicPoint, ElementaryInterval};
use crate::combinatorics::pow128;
use crate::quadrature::gauss_legendre;
use crate::{Error, Result};

/// An exponent in `[1, ∞]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Exponent {
    Finite(f64),
    Infinite,
}

impl Exponent {
    pub fn new(v: f64) -> Result<Self> {
        if v.is_infinite() && v > 0.0 {
            Ok(Exponent::Infinite)
        } else if v.is_finite() && v >= 1.0 {
            Ok(Exponent::Finite(v))
        } else {
            Err(Error::InvalidParameter(format!("exponent {v} outside [1, inf]")))
        }
    }

    /// `1/p` with `1/∞ = 0`.
    pub fn recip(self) -> f64 {
        match self {
            Exponent::Finite(p) => 1.0 / p,
            Exponent::Infinite => 0.0,
        }
    }

    /// The Hölder conjugate `p'` with `1/p + 1/p' = 1`.
    pub fn conjugate(self) -> Exponent {
        match self {
            Exponent::Infinite => Exponent::Finite(1.0),
            Exponent::Finite(p) if p == 1.0 => Exponent::Infinite,
            Exponent::Finite(p) => Exponent::Finite(p / (p - 1.0)),
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Exponent::Infinite)
    }

    pub fn as_f64(self) -> f64 {
        match self {
            Exponent::Finite(p) => p,
            Exponent::Infinite => f64::INFINITY,
        }
    }

    /// `(Σ |v|^p)^{1/p}`, or `max |v|` for `p = ∞`.
    pub fn norm(self, values: &[f64]) -> f64 {
        match self {
            Exponent::Infinite => values.iter().fold(0.0f64, |m, v| m.max(v.abs())),
            Exponent::Finite(p) => self.combine_powers(&values.iter().map(|v| v.abs().powf(p)).collect::<Vec<_>>()),
        }
    }

    /// Given `a_n^p` (or `a_n` for `p = ∞`), returns the `ℓ_p` norm of `a`.
    pub fn combine_powers(self, powers: &[f64]) -> f64 {
        match self {
            Exponent::Infinite => powers.iter().fold(0.0f64, |m, &v| m.max(v)),
            Exponent::Finite(p) => crate::par::pairwise_sum(powers).powf(1.0 / p),
        }
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exponent::Finite(p) => write!(f, "{p}"),
            Exponent::Infinite => write!(f, "inf"),
        }
    }
}

impl FromStr for Exponent {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "∞" => Ok(Exponent::Infinite),
            other => {
                let v: f64 = other
                    .parse()
                    .map_err(|_| Error::InvalidParameter(format!("cannot parse exponent '{s}'")))?;
                Exponent::new(v)
            }
        }
    }
}

/// Parameters `(b, s, α, p, q)` of a Haar wavelet space.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpaceParams {
    pub base: u32,
    pub dim: usize,
    pub alpha: f64,
    pub p: Exponent,
    pub q: Exponent,
}

impl SpaceParams {
    pub fn new(base: u32, dim: usize, alpha: f64, p: Exponent, q: Exponent) -> Result<Self> {
        if base < 2 {
            return Err(Error::InvalidBase(base));
        }
        if dim == 0 {
            return Err(Error::InvalidParameter("dimension must be at least 1".into()));
        }
        if !alpha.is_finite() {
            return Err(Error::InvalidParameter(format!("smoothness {alpha} is not finite")));
        }
        Ok(Self { base, dim, alpha, p, q })
    }

    pub fn p_dual(&self) -> Exponent {
        self.p.conjugate()
    }

    pub fn q_dual(&self) -> Exponent {
        self.q.conjugate()
    }

    /// `α - 1/p`.
    pub fn gap(&self) -> f64 {
        self.alpha - self.p.recip()
    }

    /// Exponent of the level weight `b^{(α - 1/p + 1/2)|j|}`.
    pub fn level_exponent(&self) -> f64 {
        self.gap() + 0.5
    }

    /// Whether point evaluation is continuous: `α ≥ 1/p` for `q = 1`,
    /// `α > 1/p` otherwise.
    pub fn eval_ok(&self) -> bool {
        match self.q {
            Exponent::Finite(q) if q == 1.0 => self.gap() >= 0.0,
            _ => self.gap() > 0.0,
        }
    }

    /// `C = b^{1/p'} (1 - b^{-q'(α - 1/p)})^{-1/q'}`, with `C = b^{1/p'}` when `q' = ∞`.
    pub fn point_eval_constant(&self) -> Result<f64> {
        if !self.eval_ok() {
            return Err(Error::Precondition(format!(
                "point evaluation needs alpha > 1/p (alpha >= 1/p when q = 1); got alpha = {}, p = {}, q = {}",
                self.alpha, self.p, self.q
            )));
        }
        let b = self.base as f64;
        let lead = b.powf(self.p_dual().recip());
        Ok(match self.q_dual() {
            Exponent::Infinite => lead,
            Exponent::Finite(qd) => lead * (1.0 - b.powf(-qd * self.gap())).powf(-1.0 / qd),
        })
    }
}

/// The index `(j, k, i)` of `Ψ^j_{i,k}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct WaveletIndex {
    j: Vec<u32>,
    k: Vec<u128>,
    i: Vec<u32>,
}

impl WaveletIndex {
    /// Validates `k_ℓ < b^{j_ℓ - 1}` (zero for `j_ℓ ≤ 1`) and `i_ℓ < b`
    /// (zero for `j_ℓ = 0`).
    pub fn new(base: u32, j: Vec<u32>, k: Vec<u128>, i: Vec<u32>) -> Result<Self> {
        if base < 2 {
            return Err(Error::InvalidBase(base));
        }
        if k.len() != j.len() || i.len() != j.len() {
            return Err(Error::InvalidIndex(format!(
                "j, k, i have lengths {}, {}, {}",
                j.len(),
                k.len(),
                i.len()
            )));
        }
        for c in 0..j.len() {
            let k_bound = if j[c] <= 1 { 1 } else { pow128(base, j[c] - 1) };
            let i_bound = if j[c] == 0 { 1 } else { base };
            if k[c] >= k_bound || i[c] >= i_bound {
                return Err(Error::InvalidIndex(format!(
                    "coordinate {c}: j = {}, k = {}, i = {} out of range for base {base}",
                    j[c], k[c], i[c]
                )));
            }
        }
        Ok(Self { j, k, i })
    }

    /// The scaling function `Ψ^0_{0,0} ≡ 1`.
    pub fn zero(dim: usize) -> Self {
        Self { j: vec![0; dim], k: vec![0; dim], i: vec![0; dim] }
    }

    pub(crate) fn from_parts_unchecked(j: Vec<u32>, k: Vec<u128>, i: Vec<u32>) -> Self {
        Self { j, k, i }
    }

    pub fn j(&self) -> &[u32] {
        &self.j
    }

    pub fn k(&self) -> &[u128] {
        &self.k
    }

    pub fn i(&self) -> &[u32] {
        &self.i
    }

    pub fn dim(&self) -> usize {
        self.j.len()
    }

    /// `|j|`.
    pub fn level(&self) -> u32 {
        self.j.iter().sum()
    }

    pub fn is_scaling(&self) -> bool {
        self.j.iter().all(|&l| l == 0)
    }

    /// The support `E^{j-1}_k` (level clipped at zero).
    pub fn support(&self, base: u32) -> ElementaryInterval {
        let j = self.j.iter().map(|&l| l.saturating_sub(1)).collect();
        ElementaryInterval::new(base, j, self.k.clone()).expect("valid index has a valid support")
    }

    /// The integer `Π_ℓ (b·δ(r_ℓ, i_ℓ) - 1)` on the level-`j` cell given per
    /// coordinate by `cell`, or 0 off the support.
    fn integer_factor(&self, base: u32, cell: impl Fn(usize, u32) -> Option<u128>) -> i64 {
        let b = base as u128;
        let mut prod = 1i64;
        for c in 0..self.j.len() {
            let Some(cell) = cell(c, self.j[c]) else { return 0 };
            if self.j[c] == 0 {
                continue;
            }
            if cell / b != self.k[c] {
                return 0;
            }
            prod *= if (cell % b) as u32 == self.i[c] { base as i64 - 1 } else { -1 };
        }
        prod
    }

    /// `Ψ^j_{i,k}(x)` at an exact point.
    pub fn eval(&self, base: u32, x: &BadicPoint) -> f64 {
        let f = self.integer_factor(base, |c, l| Some(x.cell(c, l)));
        f as f64 * half_power_f64(base, analysis::half_exponent(&self.j))
    }

    /// `Ψ^j_{i,k}(x)` at an exact point, in exact arithmetic.
    pub fn eval_exact(&self, base: u32, x: &BadicPoint) -> QSqrtB {
        let f = self.integer_factor(base, |c, l| Some(x.cell(c, l)));
        QSqrtB::with_half_power(
            base,
            BigRational::from_integer(f.into()),
            analysis::half_exponent(&self.j),
        )
    }

    /// `Ψ^j_{i,k}(x)` at a real point; coordinates outside `[0,1)` give 0.
    pub fn eval_f64(&self, base: u32, x: &[f64]) -> f64 {
        assert_eq!(x.len(), self.dim(), "point dimension mismatch");
        let f = self.integer_factor(base, |c, l| float_cell(x[c], base, l));
        f as f64 * half_power_f64(base, analysis::half_exponent(&self.j))
    }
}

impl Ord for WaveletIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.level()
            .cmp(&other.level())
            .then_with(|| self.j.cmp(&other.j))
            .then_with(|| self.k.cmp(&other.k))
            .then_with(|| self.i.cmp(&other.i))
    }
}

impl PartialOrd for WaveletIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// `b^{h/2}` in floating point.
pub(crate) fn half_power_f64(base: u32, h: i64) -> f64 {
    let b = base as f64;
    let whole = b.powi(h.div_euclid(2) as i32);
    if h.rem_euclid(2) == 1 {
        whole * b.sqrt()
    } else {
        whole
    }
}

fn float_cell(x: f64, base: u32, level: u32) -> Option<u128> {
    if !(0.0..1.0).contains(&x) {
        return None;
    }
    let n = pow128(base, level);
    Some(((x * n as f64).floor() as u128).min(n - 1))
}

/// `ψ^j_{i,k}(x)` for real `x`; zero outside `[0,1)`.
pub fn psi_eval(base: u32, j: u32, i: u32, k: u128, x: f64) -> Result<f64> {
    let idx = WaveletIndex::new(base, vec![j], vec![k], vec![i])?;
    Ok(idx.eval_f64(base, &[x]))
}

/// `Ψ^j_{i,k}(x)` for a real point.
pub fn psi_eval_multi(base: u32, idx: &WaveletIndex, x: &[f64]) -> Result<f64> {
    if x.len() != idx.dim() {
        return Err(Error::DimensionMismatch { expected: idx.dim(), found: x.len() });
    }
    WaveletIndex::new(base, idx.j.clone(), idx.k.clone(), idx.i.clone())?;
    Ok(idx.eval_f64(base, x))
}

/// A finitely supported coefficient sequence, iterated level-major and then
/// lexicographically in `(j, k, i)`.
#[derive(Clone, Debug, PartialEq)]
pub struct CoeffMap {
    base: u32,
    dim: usize,
    entries: BTreeMap<WaveletIndex, f64>,
}

impl CoeffMap {
    pub fn new(base: u32, dim: usize) -> Self {
        Self { base, dim, entries: BTreeMap::new() }
    }

    pub fn base(&self) -> u32 {
        self.base
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Inserts or overwrites one coefficient after validating the index.
    pub fn insert(&mut self, idx: WaveletIndex, value: f64) -> Result<()> {
        if idx.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: idx.dim() });
        }
        let idx = WaveletIndex::new(self.base, idx.j, idx.k, idx.i)?;
        self.entries.insert(idx, value);
        Ok(())
    }

    pub fn get(&self, idx: &WaveletIndex) -> f64 {
        self.entries.get(idx).copied().unwrap_or(0.0)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&WaveletIndex, &f64)> {
        self.entries.iter()
    }

    pub fn scaled(&self, lambda: f64) -> Self {
        let entries = self.entries.iter().map(|(k, v)| (k.clone(), v * lambda)).collect();
        Self { base: self.base, dim: self.dim, entries }
    }

    /// Largest `|Σ_{i_ℓ} c(j, k, i)|` over all directions `ℓ` with `j_ℓ ≥ 1`
    /// and all choices of the remaining indices.
    pub fn zero_sum_violation(&self) -> f64 {
        let mut worst = 0.0f64;
        for dir in 0..self.dim {
            let mut groups: BTreeMap<WaveletIndex, f64> = BTreeMap::new();
            for (idx, &v) in &self.entries {
                if idx.j[dir] == 0 {
                    continue;
                }
                let mut key = idx.clone();
                key.i[dir] = 0;
                *groups.entry(key).or_insert(0.0) += v;
            }
            worst = groups.values().fold(worst, |m, v| m.max(v.abs()));
        }
        worst
    }

    /// Per level vector `j`: the `ℓ_p` norm of its coefficients.
    fn level_norms(&self, p: Exponent) -> Vec<(Vec<u32>, f64)> {
        let mut out: Vec<(Vec<u32>, f64)> = Vec::new();
        let mut current: Option<Vec<u32>> = None;
        let mut bucket: Vec<f64> = Vec::new();
        for (idx, &v) in &self.entries {
            if current.as_deref() != Some(idx.j.as_slice()) {
                if let Some(j) = current.take() {
                    out.push((j, p.norm(&bucket)));
                }
                bucket.clear();
                current = Some(idx.j.clone());
            }
            bucket.push(v);
        }
        if let Some(j) = current {
            out.push((j, p.norm(&bucket)));
        }
        out
    }

    /// The wavelet space norm `‖·‖_{wav,α,s,p,q}`.
    pub fn norm(&self, sp: &SpaceParams) -> f64 {
        let terms: Vec<(u32, f64)> = self
            .level_norms(sp.p)
            .into_iter()
            .map(|(j, n)| (j.iter().sum(), n))
            .collect();
        nested_norm(sp.base, sp.level_exponent(), sp.q, &terms)
    }

    /// `S(c)(x) = Σ c(j,k,i) Ψ^j_{i,k}(x)` at an exact point.
    pub fn eval(&self, x: &BadicPoint) -> f64 {
        let terms: Vec<f64> = self
            .entries
            .iter()
            .map(|(idx, &v)| v * idx.eval(self.base, x))
            .collect();
        terms.iter().sum()
    }

    /// `S(c)(x)` at a real point.
    pub fn eval_f64(&self, x: &[f64]) -> f64 {
        self.entries
            .iter()
            .map(|(idx, &v)| v * idx.eval_f64(self.base, x))
            .sum()
    }
}

/// `(Σ_j (b^{w|j|} a_j)^q)^{1/q}` (or the maximum for `q = ∞`) over pairs
/// `(|j|, a_j)`.
pub fn nested_norm(base: u32, weight_exponent: f64, q: Exponent, terms: &[(u32, f64)]) -> f64 {
    let b = base as f64;
    let weighted: Vec<f64> = terms
        .iter()
        .map(|&(l, a)| b.powf(weight_exponent * l as f64) * a)
        .collect();
    q.norm(&weighted)
}

/// `haar_norm` as a free function.
pub fn haar_norm(c: &CoeffMap, sp: &SpaceParams) -> f64 {
    c.norm(sp)
}

/// Evaluates the finite series `S(c)` at an exact point.
pub fn series_eval(c: &CoeffMap, x: &BadicPoint) -> f64 {
    c.eval(x)
}

const SMOOTH_NODES: usize = 8;
const SMOOTH_MAX_EVALS: usize = 50_000_000;

/// `⟨f, Ψ^j_{i,k}⟩` for a general integrable `f` by composite tensor
/// Gauss-Legendre on the constancy cells of the wavelet, refining until two
/// successive estimates differ by less than `tol`.
pub fn coeff_smooth<F>(base: u32, f: F, idx: &WaveletIndex, tol: f64) -> Result<f64>
where
    F: Fn(&[f64]) -> f64,
{
    WaveletIndex::new(base, idx.j.clone(), idx.k.clone(), idx.i.clone())?;
    let s = idx.dim();
    let mut sub = 1usize;
    let mut prev = coeff_smooth_at(base, &f, idx, sub);
    loop {
        sub *= 2;
        let cells = (base as usize).pow(analysis::active_count(&idx.j) as u32);
        let evals = cells
            .saturating_mul(sub.saturating_pow(s as u32))
            .saturating_mul(SMOOTH_NODES.pow(s as u32));
        if evals > SMOOTH_MAX_EVALS {
            return Err(Error::Budget(format!(
                "coefficient quadrature did not reach tolerance {tol} within {SMOOTH_MAX_EVALS} evaluations"
            )));
        }
        let next = coeff_smooth_at(base, &f, idx, sub);
        if (next - prev).abs() < tol {
            return Ok(next);
        }
        prev = next;
    }
}

fn coeff_smooth_at<F: Fn(&[f64]) -> f64>(base: u32, f: &F, idx: &WaveletIndex, sub: usize) -> f64 {
    let s = idx.dim();
    let b = base as u128;
    let active: Vec<usize> = (0..s).filter(|&c| idx.j[c] > 0).collect();
    let rule = gauss_legendre(SMOOTH_NODES);
    let cells = (base as usize).pow(active.len() as u32);
    let scale = half_power_f64(base, analysis::half_exponent(&idx.j));
    let mut total = 0.0;
    for off in 0..cells {
        let mut lo = vec![0.0; s];
        let mut hi = vec![1.0; s];
        let mut factor = 1i64;
        let mut rest = off;
        for &c in active.iter().rev() {
            let r = (rest % base as usize) as u128;
            rest /= base as usize;
            let cell = b * idx.k[c] + r;
            let width = 1.0 / pow128(base, idx.j[c]) as f64;
            lo[c] = cell as f64 * width;
            hi[c] = lo[c] + width;
            factor *= if r as u32 == idx.i[c] { base as i64 - 1 } else { -1 };
        }
        total += factor as f64 * box_integral(f, &lo, &hi, sub, &rule.nodes, &rule.weights);
    }
    total * scale
}

/// Tensor composite Gauss-Legendre over a box with `sub` panels per axis.
pub(crate) fn box_integral<F: Fn(&[f64]) -> f64>(
    f: &F,
    lo: &[f64],
    hi: &[f64],
    sub: usize,
    nodes: &[f64],
    weights: &[f64],
) -> f64 {
    let s = lo.len();
    let n = nodes.len();
    let per_axis = sub * n;
    let mut pts: Vec<Vec<(f64, f64)>> = Vec::with_capacity(s);
    for c in 0..s {
        let h = (hi[c] - lo[c]) / sub as f64;
        let mut axis = Vec::with_capacity(per_axis);
        for panel in 0..sub {
            let a = lo[c] + panel as f64 * h;
            for q in 0..n {
                axis.push((a + 0.5 * h * (nodes[q] + 1.0), 0.5 * h * weights[q]));
            }
        }
        pts.push(axis);
    }
    let mut counter = vec![0usize; s];
    let mut x = vec![0.0; s];
    let mut acc = 0.0;
    loop {
        let mut w = 1.0;
        for c in 0..s {
            let (xc, wc) = pts[c][counter[c]];
            x[c] = xc;
            w *= wc;
        }
        acc += w * f(&x);
        let mut c = s;
        loop {
            if c == 0 {
                return acc;
            }
            c -= 1;
            counter[c] += 1;
            if counter[c] < per_axis {
                break;
            }
            counter[c] = 0;
        }
    }
}
