//! Convergence and sharpness sweeps.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::time::Instant;

use haarqmc::fractional::{extremal_function, frac_discrepancy, DiscrepancyMethod, DiscrepancyResult, ExtremalGrid};
use haarqmc::haar::{Exponent, SpaceParams};
use haarqmc::nets::{digital_net, faure_net, t_value, van_der_corput, PointSet};
use haarqmc::wce::{mock_lower_bound, wce_exact_hilbert, wce_upper_dual, NormMode, WceBound};
use haarqmc::{io, par};

use crate::config::{ExperimentConfig, ExperimentKind, Generator, Method};
use crate::CliError;

pub const CONVERGENCE_HEADER: &str = "b,s,t,m,N,alpha,p,q,method,value,tail,seconds";
pub const SHARPNESS_HEADER: &str = "b,s,t,m,N,alpha,p,q,panels,dstar,ratio,seconds";

pub fn upper(p: &PointSet, sp: &SpaceParams, j_max: Option<u32>) -> Result<WceBound, CliError> {
    Ok(wce_upper_dual(p, sp, j_max)?)
}

pub fn lower(p: &PointSet, sp: &SpaceParams) -> Result<f64, CliError> {
    Ok(mock_lower_bound(p, sp, NormMode::Exact)?.value)
}

pub fn hilbert(p: &PointSet, alpha: f64) -> Result<f64, CliError> {
    Ok(wce_exact_hilbert(p, alpha)?)
}

/// `D*_{α,s,p',q'}` for the conjugate exponents of `sp`: the closed form when
/// `p' = q' = 2` and `α > 1/2`, the tensor quadrature otherwise.
pub fn discrepancy(p: &PointSet, sp: &SpaceParams, tol: f64) -> Result<DiscrepancyResult, CliError> {
    let (pd, qd) = (sp.p_dual(), sp.q_dual());
    let two = Exponent::Finite(2.0);
    let method = if pd == two && qd == two && sp.alpha > 0.5 {
        DiscrepancyMethod::Warnock
    } else {
        DiscrepancyMethod::TensorQuad
    };
    Ok(frac_discrepancy(p, sp.alpha, pd, qd, method, tol)?)
}

/// Least-squares rate fit of `ln e` against `ln N`.
#[derive(Clone, Debug, PartialEq)]
pub struct RateFit {
    /// Fitted exponent `â`, excluding the smallest `m`.
    pub exponent: f64,
    /// Range of `e / (N^{-α} ln(N)^{(s-1)/q'})` over all rows.
    pub band_min: f64,
    pub band_max: f64,
    /// Number of points entering the slope fit.
    pub points: usize,
}

impl RateFit {
    pub fn band_factor(&self) -> f64 {
        self.band_max / self.band_min
    }
}

/// `N^{-α} ln(N)^{(s-1)/q'}`; the log factor is dropped for `q' = ∞`.
pub fn rate_scale(n: f64, alpha: f64, s: usize, q_dual: Exponent) -> f64 {
    let log_power = match q_dual {
        Exponent::Infinite => 0.0,
        Exponent::Finite(qd) => (s as f64 - 1.0) / qd,
    };
    n.powf(-alpha) * n.ln().powf(log_power)
}

/// Fits `(m, N, value)` triples; `None` when fewer than 4 positive values
/// remain after dropping the smallest `m`.
pub fn fit_rate(rows: &[(u32, f64, f64)], alpha: f64, s: usize, q_dual: Exponent) -> Option<RateFit> {
    let m_min = rows.iter().map(|r| r.0).min()?;
    let pts: Vec<(f64, f64)> =
        rows.iter().filter(|r| r.0 > m_min && r.2 > 0.0).map(|r| (r.1.ln(), r.2.ln())).collect();
    if pts.len() < 4 {
        return None;
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let ratios = rows.iter().map(|r| r.2 / rate_scale(r.1, alpha, s, q_dual));
    let (band_min, band_max) = ratios.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    Some(RateFit { exponent: sxy / sxx, band_min, band_max, points: pts.len() })
}

/// One generated point set for a given `m`; random generators yield several.
#[derive(Clone, Debug)]
pub struct Instance {
    pub m: u32,
    pub t: Option<u32>,
    pub sets: Vec<PointSet>,
}

/// Seed of replicate `r` at resolution `m`.
pub fn replicate_seed(seed: u64, m: u32, r: usize) -> u64 {
    seed ^ ((m as u64) << 32) ^ (r as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

pub fn build_instance(cfg: &ExperimentConfig, m: u32) -> Result<Instance, CliError> {
    let (b, s) = (cfg.base, cfg.dim);
    let single = |p: PointSet| -> Result<Instance, CliError> {
        let t = t_value(&p)?;
        Ok(Instance { m, t: Some(t), sets: vec![p] })
    };
    match &cfg.generator {
        Generator::Faure => single(faure_net(b, m, s)?),
        Generator::VanDerCorput => single(van_der_corput(b, m)?),
        Generator::Matrices(path) => {
            let file = std::fs::File::open(path).map_err(|e| CliError::io(path, e))?;
            let g = io::read_matrices(std::io::BufReader::new(file), b, m as usize)?;
            if g.dim() != s {
                return Err(CliError::Validation(format!("{} holds {} matrices, expected s = {s}", path.display(), g.dim())));
            }
            single(digital_net(&g)?)
        }
        Generator::Random { replicates } => {
            let n = (b as usize)
                .checked_pow(m)
                .ok_or_else(|| CliError::Validation(format!("b^m overflows for m = {m}")))?;
            let sets = (0..*replicates)
                .map(|r| PointSet::uniform_random(b, s, n, replicate_seed(cfg.seed, m, r)))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(Instance { m, t: None, sets })
        }
    }
}

fn rms(values: &[f64]) -> f64 {
    (values.iter().map(|v| v * v).sum::<f64>() / values.len() as f64).sqrt()
}

/// A computed CSV row.
#[derive(Clone, Debug, PartialEq)]
pub struct Row {
    pub b: u32,
    pub s: usize,
    pub t: Option<u32>,
    pub m: u32,
    pub n: usize,
    pub params: SpaceParams,
    pub method: Method,
    pub value: f64,
    pub tail: Option<f64>,
    pub seconds: Option<f64>,
}

fn opt<T: std::fmt::Display>(v: Option<T>) -> String {
    v.map_or_else(String::new, |x| x.to_string())
}

impl Row {
    pub fn csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            self.b,
            self.s,
            opt(self.t),
            self.m,
            self.n,
            self.params.alpha,
            self.params.p,
            self.params.q,
            self.method,
            self.value,
            opt(self.tail),
            opt(self.seconds)
        )
    }
}

fn evaluate(cfg: &ExperimentConfig, inst: &Instance, sp: &SpaceParams, method: Method) -> Result<Row, CliError> {
    let start = Instant::now();
    let mut values = Vec::with_capacity(inst.sets.len());
    let mut tails = Vec::new();
    for p in &inst.sets {
        let v = match method {
            Method::Upper => {
                let w = upper(p, sp, cfg.j_max)?;
                tails.push(w.tail);
                w.total
            }
            Method::Lower => lower(p, sp)?,
            Method::Hilbert => hilbert(p, sp.alpha)?,
            Method::Discrepancy => discrepancy(p, sp, cfg.tol)?.value,
        };
        values.push(v);
    }
    let (value, tail) = if values.len() == 1 {
        (values[0], tails.first().copied())
    } else {
        (rms(&values), (!tails.is_empty()).then(|| rms(&tails)))
    };
    Ok(Row {
        b: cfg.base,
        s: cfg.dim,
        t: inst.t,
        m: inst.m,
        n: inst.sets[0].len(),
        params: *sp,
        method,
        value,
        tail,
        seconds: cfg.timing.then(|| start.elapsed().as_secs_f64()),
    })
}

/// Rows of one convergence experiment plus one fit per `(params, method)`.
#[derive(Clone, Debug)]
pub struct ConvergenceResult {
    pub rows: Vec<Row>,
    pub fits: Vec<(SpaceParams, Method, Option<RateFit>)>,
}

pub fn run_convergence(cfg: &ExperimentConfig) -> Result<ConvergenceResult, CliError> {
    let ms: Vec<u32> = cfg.m_values().collect();
    let instances = par::map_collect(&ms, |&m| build_instance(cfg, m)).into_iter().collect::<Result<Vec<_>, _>>()?;
    let mut jobs = Vec::new();
    for (ii, _) in instances.iter().enumerate() {
        for (pi, _) in cfg.params.iter().enumerate() {
            for &method in &cfg.methods {
                jobs.push((ii, pi, method));
            }
        }
    }
    let rows = par::map_collect(&jobs, |&(ii, pi, method)| evaluate(cfg, &instances[ii], &cfg.params[pi], method))
        .into_iter()
        .collect::<Result<Vec<_>, _>>()?;
    let mut fits = Vec::new();
    for sp in &cfg.params {
        for &method in &cfg.methods {
            let pts: Vec<(u32, f64, f64)> = rows
                .iter()
                .filter(|r| r.params == *sp && r.method == method)
                .map(|r| (r.m, r.n as f64, r.value))
                .collect();
            fits.push((*sp, method, fit_rate(&pts, sp.alpha, sp.dim, sp.q_dual())));
        }
    }
    Ok(ConvergenceResult { rows, fits })
}

#[derive(Clone, Debug, PartialEq)]
pub struct SharpnessRow {
    pub b: u32,
    pub s: usize,
    pub t: Option<u32>,
    pub m: u32,
    pub n: usize,
    pub params: SpaceParams,
    pub panels: usize,
    pub dstar: f64,
    pub ratio: f64,
    pub seconds: Option<f64>,
}

impl SharpnessRow {
    pub fn csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            self.b,
            self.s,
            opt(self.t),
            self.m,
            self.n,
            self.params.alpha,
            self.params.p,
            self.params.q,
            self.panels,
            self.dstar,
            self.ratio,
            opt(self.seconds)
        )
    }
}

/// Achieved ratio and `D*` of the extremal function on a mesh with `panels`
/// uniform panels per axis.
pub fn sharpness(p: &PointSet, sp: &SpaceParams, panels: usize) -> Result<(f64, f64), CliError> {
    let r = extremal_function(p, sp.alpha, sp.p, sp.q, ExtremalGrid::from_panels(panels))?;
    Ok((r.ratio, r.discrepancy))
}

pub fn run_sharpness(cfg: &ExperimentConfig) -> Result<Vec<SharpnessRow>, CliError> {
    let ms: Vec<u32> = cfg.m_values().collect();
    let instances = ms.iter().map(|&m| build_instance(cfg, m)).collect::<Result<Vec<_>, _>>()?;
    let jobs: Vec<(usize, usize, usize)> = instances
        .iter()
        .enumerate()
        .flat_map(|(ii, inst)| {
            (0..cfg.params.len()).flat_map(move |pi| (0..inst.sets.len()).map(move |r| (ii, pi, r)))
        })
        .collect();
    par::map_collect(&jobs, |&(ii, pi, r)| {
        let inst = &instances[ii];
        let sp = &cfg.params[pi];
        let start = Instant::now();
        let (ratio, dstar) = sharpness(&inst.sets[r], sp, cfg.panels)?;
        Ok(SharpnessRow {
            b: cfg.base,
            s: cfg.dim,
            t: inst.t,
            m: inst.m,
            n: inst.sets[r].len(),
            params: *sp,
            panels: cfg.panels,
            dstar,
            ratio,
            seconds: cfg.timing.then(|| start.elapsed().as_secs_f64()),
        })
    })
    .into_iter()
    .collect()
}

/// CSV text per output target (`None` is standard output) and summary lines.
#[derive(Clone, Debug, Default)]
pub struct RunReport {
    pub outputs: BTreeMap<Option<PathBuf>, String>,
    pub summary: Vec<String>,
}

pub fn run_all(cfgs: &[ExperimentConfig]) -> Result<RunReport, CliError> {
    let mut report = RunReport::default();
    let mut kinds: BTreeMap<Option<PathBuf>, ExperimentKind> = BTreeMap::new();
    for cfg in cfgs {
        if let Some(prev) = kinds.insert(cfg.output.clone(), cfg.kind) {
            if prev != cfg.kind {
                return Err(CliError::Validation(format!(
                    "experiment '{}' mixes convergence and sharpness tables in one output",
                    cfg.name
                )));
            }
        }
    }
    for cfg in cfgs {
        let out = report.outputs.entry(cfg.output.clone()).or_default();
        if out.is_empty() {
            let header = match cfg.kind {
                ExperimentKind::Convergence => CONVERGENCE_HEADER,
                ExperimentKind::Sharpness => SHARPNESS_HEADER,
            };
            writeln!(out, "{header}").expect("writing to a string");
        }
        match cfg.kind {
            ExperimentKind::Convergence => {
                let res = run_convergence(cfg)?;
                for row in &res.rows {
                    writeln!(out, "{}", row.csv()).expect("writing to a string");
                }
                for (sp, method, fit) in &res.fits {
                    let head = format!(
                        "fit {} b={} s={} alpha={} p={} q={} method={}",
                        cfg.name, sp.base, sp.dim, sp.alpha, sp.p, sp.q, method
                    );
                    report.summary.push(match fit {
                        Some(f) => format!(
                            "{head} exponent={:.4} band=[{:.6e},{:.6e}] factor={:.3} points={}",
                            f.exponent,
                            f.band_min,
                            f.band_max,
                            f.band_factor(),
                            f.points
                        ),
                        None => format!("{head} exponent=n/a (fewer than 4 points after dropping the smallest m)"),
                    });
                }
            }
            ExperimentKind::Sharpness => {
                for row in run_sharpness(cfg)? {
                    writeln!(out, "{}", row.csv()).expect("writing to a string");
                }
            }
        }
    }
    Ok(report)
}
