//! Plain-text and binary file formats.
//!
//! * Point sets: a header line `b m s N`, then `N` lines of `s` base-b digit
//!   strings of length `m`, most significant digit first. Digits above 9 are
//!   written as `a`..`z`, so bases up to 36 are supported. A point of
//!   precision zero writes each coordinate as `-`.
//! * Generator matrices: `s` blocks of `m` rows, each row holding `m` digits
//!   either whitespace separated or as one digit string. Blank lines and
//!   lines starting with `#` are ignored.
//! * Coefficient maps: one line `j_1..j_s k_1..k_s i_1..i_s value` per entry.
//! * Piecewise constant functions: little-endian `u32` header `b m s`
//!   followed by the `b^{ms}` cell values as little-endian `f64`.

use std::io::{BufRead, Read, Write};

use crate::badic::BadicPoint;
use crate::haar::{CoeffMap, PiecewiseConstant, WaveletIndex};
use crate::nets::{GeneratorMatrices, PointSet};
use crate::{Error, Result};

const MAX_TEXT_BASE: u32 = 36;

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

fn digit_char(d: u32) -> char {
    char::from_digit(d, MAX_TEXT_BASE).expect("digit below 36")
}

fn content_lines<R: BufRead>(r: R) -> impl Iterator<Item = (usize, std::io::Result<String>)> {
    r.lines().enumerate().map(|(i, l)| (i + 1, l)).filter(|(_, l)| match l {
        Ok(s) => {
            let t = s.trim();
            !t.is_empty() && !t.starts_with('#')
        }
        Err(_) => true,
    })
}

pub fn write_point_set<W: Write>(p: &PointSet, mut w: W) -> Result<()> {
    if p.base() > MAX_TEXT_BASE {
        return Err(Error::InvalidParameter(format!("text format supports bases up to {MAX_TEXT_BASE}")));
    }
    writeln!(w, "{} {} {} {}", p.base(), p.precision(), p.dim(), p.len())?;
    let mut line = String::new();
    for x in p.points() {
        line.clear();
        for c in 0..p.dim() {
            if c > 0 {
                line.push(' ');
            }
            let ds = x.digits(c);
            if ds.is_empty() {
                line.push('-');
            }
            line.extend(ds.into_iter().map(digit_char));
        }
        writeln!(w, "{line}")?;
    }
    Ok(())
}

pub fn read_point_set<R: BufRead>(r: R) -> Result<PointSet> {
    let mut lines = content_lines(r);
    let (hl, header) = lines.next().ok_or_else(|| parse_err(1, "missing header"))?;
    let header = header?;
    let fields: Vec<u64> = header
        .split_whitespace()
        .map(|t| t.parse::<u64>().map_err(|_| parse_err(hl, format!("bad header field '{t}'"))))
        .collect::<Result<_>>()?;
    let [b, m, s, n] = fields[..] else {
        return Err(parse_err(hl, "header must be 'b m s N'"));
    };
    if !(2..=MAX_TEXT_BASE as u64).contains(&b) {
        return Err(parse_err(hl, format!("base {b} outside 2..={MAX_TEXT_BASE}")));
    }
    let (b, m, s) = (b as u32, m as u32, s as usize);
    if s == 0 {
        return Err(parse_err(hl, "dimension must be positive"));
    }
    let mut points = Vec::with_capacity(n.min(1 << 24) as usize);
    for (ln, line) in lines.by_ref().take(n as usize) {
        let line = line?;
        let coords: Vec<&str> = line.split_whitespace().collect();
        if coords.len() != s {
            return Err(parse_err(ln, format!("expected {s} digit strings, found {}", coords.len())));
        }
        let mut digits = Vec::with_capacity(s);
        for word in coords {
            let word = if m == 0 && word == "-" { "" } else { word };
            if word.chars().count() != m as usize {
                return Err(parse_err(ln, format!("digit string '{word}' does not have {m} digits")));
            }
            let ds = word
                .chars()
                .map(|ch| match ch.to_digit(MAX_TEXT_BASE) {
                    Some(d) if d < b => Ok(d),
                    _ => Err(parse_err(ln, format!("'{ch}' is not a base-{b} digit"))),
                })
                .collect::<Result<Vec<u32>>>()?;
            digits.push(ds);
        }
        let x = BadicPoint::from_digits(&digits, b).map_err(|e| parse_err(ln, e.to_string()))?;
        points.push(x);
    }
    if points.len() as u64 != n {
        return Err(parse_err(hl, format!("header announces {n} points, found {}", points.len())));
    }
    if let Some((ln, _)) = lines.next() {
        return Err(parse_err(ln, "trailing data after the last point"));
    }
    PointSet::new(b, m, s, points)
}

pub fn write_matrices<W: Write>(g: &GeneratorMatrices, mut w: W) -> Result<()> {
    for (l, mat) in g.matrices.iter().enumerate() {
        writeln!(w, "# coordinate {}", l + 1)?;
        for row in mat {
            let words: Vec<String> = row.iter().map(|d| d.to_string()).collect();
            writeln!(w, "{}", words.join(" "))?;
        }
    }
    Ok(())
}

/// Reads `s` blocks of `m × m` digits in base `b`; `s` is inferred from the
/// number of rows.
pub fn read_matrices<R: BufRead>(r: R, base: u32, m: usize) -> Result<GeneratorMatrices> {
    if m == 0 {
        return Err(Error::InvalidParameter("matrices need m >= 1".into()));
    }
    let mut rows = Vec::new();
    let mut last = 0;
    for (ln, line) in content_lines(r) {
        let line = line?;
        last = ln;
        let words: Vec<&str> = line.split_whitespace().collect();
        let row: Vec<u32> = if words.len() == 1 && m > 1 {
            words[0]
                .chars()
                .map(|ch| ch.to_digit(MAX_TEXT_BASE).ok_or_else(|| parse_err(ln, format!("bad digit '{ch}'"))))
                .collect::<Result<_>>()?
        } else {
            words
                .iter()
                .map(|t| t.parse::<u32>().map_err(|_| parse_err(ln, format!("bad digit '{t}'"))))
                .collect::<Result<_>>()?
        };
        if row.len() != m {
            return Err(parse_err(ln, format!("expected {m} digits, found {}", row.len())));
        }
        if let Some(&d) = row.iter().find(|&&d| d >= base) {
            return Err(parse_err(ln, format!("digit {d} out of range for base {base}")));
        }
        rows.push(row);
    }
    if rows.is_empty() || rows.len() % m != 0 {
        return Err(parse_err(last.max(1), format!("{} rows is not a positive multiple of m = {m}", rows.len())));
    }
    let matrices = rows.chunks(m).map(|c| c.to_vec()).collect();
    GeneratorMatrices::new(base, m, matrices)
}

pub fn write_coeff_map<W: Write>(c: &CoeffMap, mut w: W) -> Result<()> {
    for (idx, v) in c.iter() {
        let mut words: Vec<String> = idx.j().iter().map(|x| x.to_string()).collect();
        words.extend(idx.k().iter().map(|x| x.to_string()));
        words.extend(idx.i().iter().map(|x| x.to_string()));
        words.push(format!("{v:e}"));
        writeln!(w, "{}", words.join(" "))?;
    }
    Ok(())
}

/// Reads a coefficient map of dimension `dim` in base `base`.
pub fn read_coeff_map<R: BufRead>(r: R, base: u32, dim: usize) -> Result<CoeffMap> {
    let mut map = CoeffMap::new(base, dim);
    for (ln, line) in content_lines(r) {
        let line = line?;
        let words: Vec<&str> = line.split_whitespace().collect();
        if words.len() != 3 * dim + 1 {
            return Err(parse_err(ln, format!("expected {} fields, found {}", 3 * dim + 1, words.len())));
        }
        let int = |t: &str| t.parse::<u128>().map_err(|_| parse_err(ln, format!("bad integer '{t}'")));
        let j = words[..dim].iter().map(|t| int(t).map(|v| v as u32)).collect::<Result<Vec<_>>>()?;
        let k = words[dim..2 * dim].iter().map(|t| int(t)).collect::<Result<Vec<_>>>()?;
        let i = words[2 * dim..3 * dim].iter().map(|t| int(t).map(|v| v as u32)).collect::<Result<Vec<_>>>()?;
        let value: f64 = words[3 * dim].parse().map_err(|_| parse_err(ln, format!("bad value '{}'", words[3 * dim])))?;
        let idx = WaveletIndex::new(base, j, k, i).map_err(|e| parse_err(ln, e.to_string()))?;
        map.insert(idx, value).map_err(|e| parse_err(ln, e.to_string()))?;
    }
    Ok(map)
}

pub fn write_piecewise<W: Write>(f: &PiecewiseConstant<f64>, mut w: W) -> Result<()> {
    for h in [f.base(), f.level(), f.dim() as u32] {
        w.write_all(&h.to_le_bytes())?;
    }
    for v in f.values() {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_piecewise<R: Read>(mut r: R) -> Result<PiecewiseConstant<f64>> {
    let mut word = [0u8; 4];
    let mut header = [0u32; 3];
    for h in header.iter_mut() {
        r.read_exact(&mut word)?;
        *h = u32::from_le_bytes(word);
    }
    let [b, m, s] = header;
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    if bytes.len() % 8 != 0 {
        return Err(Error::Io(format!("{} value bytes is not a multiple of 8", bytes.len())));
    }
    let values = bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk"))).collect();
    PiecewiseConstant::new(b, m, s as usize, values)
}
