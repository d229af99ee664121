//! Small integer helpers shared by the net and wavelet code.

/// All compositions of `total` into `parts` non-negative parts, in
/// lexicographic order.
pub fn compositions(total: u32, parts: usize) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    if parts == 0 {
        if total == 0 {
            out.push(Vec::new());
        }
        return out;
    }
    let mut current = vec![0u32; parts];
    fill(total, 0, &mut current, &mut out);
    out
}

fn fill(remaining: u32, pos: usize, current: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
    if pos + 1 == current.len() {
        current[pos] = remaining;
        out.push(current.clone());
        return;
    }
    for v in 0..=remaining {
        current[pos] = v;
        fill(remaining - v, pos + 1, current, out);
    }
}

/// Level vectors `j` with `lo <= |j| <= hi`, level-major then lexicographic.
pub fn level_vectors(lo: u32, hi: u32, parts: usize) -> Vec<Vec<u32>> {
    (lo..=hi).flat_map(|l| compositions(l, parts)).collect()
}

/// Level vectors with every entry in `0..=max`, ordered by `|j|` and then
/// lexicographically.
pub fn box_level_vectors(max: u32, parts: usize) -> Vec<Vec<u32>> {
    level_vectors(0, max * parts as u32, parts)
        .into_iter()
        .filter(|j| j.iter().all(|&l| l <= max))
        .collect()
}

/// Binomial coefficient as f64 (exact for the small arguments used here).
pub fn binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0f64;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc.round()
}

/// Exact binomial coefficient modulo a prime `b` via Lucas' theorem.
pub fn binomial_mod(n: u64, k: u64, b: u64) -> u64 {
    let mut n = n;
    let mut k = k;
    let mut acc = 1u64;
    while n > 0 || k > 0 {
        let (ni, ki) = (n % b, k % b);
        if ki > ni {
            return 0;
        }
        acc = acc * small_binomial(ni, ki) % b;
        n /= b;
        k /= b;
    }
    acc
}

fn small_binomial(n: u64, k: u64) -> u64 {
    let k = k.min(n - k);
    let mut acc = 1u128;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc as u64
}

pub fn is_prime(b: u32) -> bool {
    if b < 2 {
        return false;
    }
    let mut d = 2u32;
    while d * d <= b {
        if b.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// `b^e` if it fits in a u64.
pub fn checked_pow(b: u32, e: u32) -> Option<u64> {
    (b as u64).checked_pow(e)
}

/// `b^e` as u128; panics on overflow.
pub fn pow128(b: u32, e: u32) -> u128 {
    (b as u128)
        .checked_pow(e)
        .expect("b-adic level exceeds 128-bit cell indices")
}

/// Returns `m` with `b^m == n`, if any.
pub fn exact_log(b: u32, n: u64) -> Option<u32> {
    let mut m = 0;
    let mut acc = 1u64;
    while acc < n {
        acc = acc.checked_mul(b as u64)?;
        m += 1;
    }
    (acc == n).then_some(m)
}
