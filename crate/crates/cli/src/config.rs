//! Experiment configuration files.
//!
//! A config is a flat `key = value` file. Keys before the first
//! `[experiment]` header are defaults shared by every experiment; each
//! `[experiment]` header starts a new experiment that may override them.
//! Lists are comma separated and `#` starts a comment.
//!
//! ```text
//! output = rates.csv
//! seed = 7
//!
//! [experiment]
//! name = vdc
//! generator = vdc
//! b = 2
//! s = 1
//! m = 4..10
//! alpha = 0.75, 1
//! p = 2
//! q = 2
//! methods = upper, hilbert
//! ```

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use haarqmc::haar::{Exponent, SpaceParams};

use crate::CliError;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Generator {
    Faure,
    VanDerCorput,
    /// Digital net from a generator-matrix file.
    Matrices(PathBuf),
    /// Independent uniform point sets of size `b^m`; values are the root
    /// mean square over the replicates.
    Random { replicates: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Upper,
    Lower,
    Hilbert,
    Discrepancy,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Upper => "upper",
            Method::Lower => "lower",
            Method::Hilbert => "hilbert",
            Method::Discrepancy => "discrepancy",
        }
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "upper" => Ok(Method::Upper),
            "lower" => Ok(Method::Lower),
            "hilbert" => Ok(Method::Hilbert),
            "discrepancy" => Ok(Method::Discrepancy),
            other => Err(format!("unknown method '{other}' (expected upper, lower, hilbert or discrepancy)")),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExperimentKind {
    /// One CSV row per `(m, params, method)` plus rate fits.
    Convergence,
    /// Extremal-function ratios for the sharp Koksma-Hlawka inequality.
    Sharpness,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub name: String,
    pub kind: ExperimentKind,
    pub generator: Generator,
    pub base: u32,
    pub dim: usize,
    pub m_min: u32,
    pub m_max: u32,
    pub params: Vec<SpaceParams>,
    pub methods: Vec<Method>,
    pub output: Option<PathBuf>,
    pub seed: u64,
    pub tol: f64,
    pub timing: bool,
    pub j_max: Option<u32>,
    /// Uniform panels per axis of the extremal-function mesh.
    pub panels: usize,
}

impl ExperimentConfig {
    pub fn m_values(&self) -> impl Iterator<Item = u32> {
        self.m_min..=self.m_max
    }
}

/// Command-line overrides applied on top of every experiment.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub output: Option<PathBuf>,
    pub seed: Option<u64>,
    pub tol: Option<f64>,
    pub timing: bool,
}

const KEYS: &[&str] = &[
    "name", "kind", "generator", "matrices", "replicates", "b", "s", "m", "alpha", "p", "q", "methods", "output",
    "seed", "tol", "timing", "jmax", "panels",
];

#[derive(Clone, Debug, Default)]
struct Section {
    header_line: usize,
    entries: BTreeMap<String, (usize, String)>,
}

pub fn load(path: &Path, overrides: &Overrides) -> Result<Vec<ExperimentConfig>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let base_dir = path.parent().unwrap_or(Path::new("."));
    parse(&text, base_dir, overrides)
}

/// Parses a config; relative file paths are resolved against `base_dir`.
pub fn parse(text: &str, base_dir: &Path, overrides: &Overrides) -> Result<Vec<ExperimentConfig>, CliError> {
    let mut defaults = Section::default();
    let mut sections: Vec<Section> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if line.starts_with('[') {
            if line != "[experiment]" {
                return Err(CliError::config(line_no, format!("unknown section '{line}'")));
            }
            sections.push(Section { header_line: line_no, entries: BTreeMap::new() });
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| CliError::config(line_no, format!("expected 'key = value', found '{line}'")))?;
        let key = key.trim().to_ascii_lowercase();
        if !KEYS.contains(&key.as_str()) {
            return Err(CliError::config(line_no, format!("unknown key '{key}'")));
        }
        let target = sections.last_mut().unwrap_or(&mut defaults);
        if target.entries.insert(key.clone(), (line_no, value.trim().to_string())).is_some() {
            return Err(CliError::config(line_no, format!("duplicate key '{key}'")));
        }
    }
    if sections.is_empty() {
        return Err(CliError::config(text.lines().count().max(1), "no [experiment] section"));
    }
    sections
        .iter()
        .enumerate()
        .map(|(idx, sec)| build(idx, sec, &defaults, base_dir, overrides))
        .collect()
}

struct Lookup<'a> {
    sec: &'a Section,
    defaults: &'a Section,
}

impl Lookup<'_> {
    fn get(&self, key: &str) -> Option<(usize, &str)> {
        self.sec
            .entries
            .get(key)
            .or_else(|| self.defaults.entries.get(key))
            .map(|(l, v)| (*l, v.as_str()))
    }

    fn require(&self, key: &str) -> Result<(usize, &str), CliError> {
        self.get(key)
            .ok_or_else(|| CliError::config(self.sec.header_line, format!("experiment is missing key '{key}'")))
    }

    fn parsed<T: FromStr>(&self, key: &str) -> Result<Option<T>, CliError>
    where
        T::Err: fmt::Display,
    {
        self.get(key)
            .map(|(line, v)| v.parse::<T>().map_err(|e| CliError::config(line, format!("bad value for '{key}': {e}"))))
            .transpose()
    }

    fn list<T: FromStr>(&self, key: &str) -> Result<(usize, Vec<T>), CliError>
    where
        T::Err: fmt::Display,
    {
        let (line, v) = self.require(key)?;
        let items = v
            .split(',')
            .map(|t| t.trim().parse::<T>().map_err(|e| CliError::config(line, format!("bad entry in '{key}': {e}"))))
            .collect::<Result<Vec<T>, _>>()?;
        if items.is_empty() {
            return Err(CliError::config(line, format!("'{key}' is empty")));
        }
        Ok((line, items))
    }
}

/// Parses `a..b`, `a..=b` (both inclusive) or a single value.
pub fn parse_m_range(s: &str) -> Result<(u32, u32), String> {
    let s = s.trim();
    let (lo, hi) = match s.split_once("..") {
        Some((lo, hi)) => (lo.trim(), hi.trim().trim_start_matches('=').trim()),
        None => (s, s),
    };
    let lo: u32 = lo.parse().map_err(|_| format!("bad m-range '{s}'"))?;
    let hi: u32 = hi.parse().map_err(|_| format!("bad m-range '{s}'"))?;
    if lo > hi {
        return Err(format!("m-range '{s}' is empty"));
    }
    Ok((lo, hi))
}

fn build(
    idx: usize,
    sec: &Section,
    defaults: &Section,
    base_dir: &Path,
    overrides: &Overrides,
) -> Result<ExperimentConfig, CliError> {
    let look = Lookup { sec, defaults };
    let name = look.get("name").map_or_else(|| format!("experiment{}", idx + 1), |(_, v)| v.to_string());
    let kind = match look.get("kind") {
        None | Some((_, "convergence")) => ExperimentKind::Convergence,
        Some((_, "sharpness")) => ExperimentKind::Sharpness,
        Some((line, other)) => return Err(CliError::config(line, format!("unknown kind '{other}'"))),
    };
    let (gen_line, gen) = look.require("generator")?;
    let generator = match gen {
        "faure" => Generator::Faure,
        "vdc" => Generator::VanDerCorput,
        "matrices" => {
            let (_, file) = look.require("matrices")?;
            Generator::Matrices(base_dir.join(file))
        }
        "random" => Generator::Random { replicates: look.parsed("replicates")?.unwrap_or(32) },
        other => return Err(CliError::config(gen_line, format!("unknown generator '{other}'"))),
    };
    if let Generator::Random { replicates: 0 } = generator {
        return Err(CliError::config(look.require("replicates")?.0, "replicates must be positive"));
    }
    let base: u32 = look.parsed("b")?.ok_or_else(|| CliError::config(sec.header_line, "experiment is missing key 'b'"))?;
    let dim: usize = look.parsed("s")?.unwrap_or(1);
    let (m_line, m_text) = look.require("m")?;
    let (m_min, m_max) = parse_m_range(m_text).map_err(|e| CliError::config(m_line, e))?;
    if dim == 0 {
        return Err(CliError::config(look.require("s")?.0, "s must be positive"));
    }
    if generator == Generator::VanDerCorput && dim != 1 {
        return Err(CliError::config(gen_line, "the van der Corput generator needs s = 1"));
    }

    let (alpha_line, alphas) = look.list::<f64>("alpha")?;
    let (_, ps) = look.list::<Exponent>("p")?;
    let (_, qs) = look.list::<Exponent>("q")?;
    let mut params = Vec::new();
    for &alpha in &alphas {
        for &p in &ps {
            for &q in &qs {
                let sp = SpaceParams::new(base, dim, alpha, p, q).map_err(|e| CliError::config(alpha_line, e.to_string()))?;
                if !sp.eval_ok() {
                    return Err(CliError::config(alpha_line, format!("alpha = {alpha} must exceed 1/p for p = {p}")));
                }
                params.push(sp);
            }
        }
    }

    let methods = match kind {
        ExperimentKind::Sharpness => Vec::new(),
        ExperimentKind::Convergence => {
            let (line, methods) = look.list::<Method>("methods")?;
            for sp in &params {
                for &method in &methods {
                    check_method(method, sp).map_err(|e| CliError::config(line, e))?;
                }
            }
            methods
        }
    };
    if kind == ExperimentKind::Sharpness {
        for sp in &params {
            if sp.p.is_infinite() || sp.p.as_f64() <= 1.0 {
                return Err(CliError::config(alpha_line, "sharpness needs finite p > 1"));
            }
        }
    }

    let seed = match overrides.seed {
        Some(s) => s,
        None => look.parsed("seed")?.unwrap_or(0),
    };
    let tol = match overrides.tol {
        Some(t) => t,
        None => look.parsed("tol")?.unwrap_or(1e-6),
    };
    if !(tol > 0.0) {
        return Err(CliError::Validation(format!("tolerance must be positive, got {tol}")));
    }
    let timing = overrides.timing || look.parsed::<bool>("timing")?.unwrap_or(false);
    let output = overrides.output.clone().or_else(|| look.get("output").map(|(_, v)| base_dir.join(v)));
    let panels: usize = look.parsed("panels")?.unwrap_or(128);
    if panels == 0 {
        return Err(CliError::config(look.require("panels")?.0, "panels must be positive"));
    }
    Ok(ExperimentConfig {
        name,
        kind,
        generator,
        base,
        dim,
        m_min,
        m_max,
        params,
        methods,
        output,
        seed,
        tol,
        timing,
        j_max: look.parsed("jmax")?,
        panels,
    })
}

/// Checks that `method` can be evaluated for `sp`.
pub fn check_method(method: Method, sp: &SpaceParams) -> Result<(), String> {
    let two = Exponent::Finite(2.0);
    match method {
        Method::Hilbert if sp.p != two || sp.q != two || sp.alpha <= 0.5 => {
            Err(format!("hilbert needs p = q = 2 and alpha > 1/2 (got alpha = {}, p = {}, q = {})", sp.alpha, sp.p, sp.q))
        }
        Method::Discrepancy | Method::Hilbert if sp.alpha > 1.0 => {
            Err(format!("{method} needs alpha <= 1, got {}", sp.alpha))
        }
        _ => Ok(()),
    }
}
