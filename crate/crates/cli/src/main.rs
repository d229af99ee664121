use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use haarqmc::cubature::exactness_report;
use haarqmc::fractional::{frac_discrepancy, DiscrepancyMethod};
use haarqmc::haar::{Exponent, SpaceParams};
use haarqmc::io;
use haarqmc::nets::{digital_net, faure_net, t_value, van_der_corput, verify_net, PointSet};
use haarqmc_cli::config::{self, Overrides};
use haarqmc_cli::experiment;
use haarqmc_cli::CliError;

#[derive(Parser)]
#[command(name = "haarqmc", version, about = "Digital nets, Haar wavelet worst-case errors and fractional discrepancy")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate or verify point sets.
    #[command(subcommand)]
    Net(NetCommand),
    /// Check that the rule integrates all wavelets with |j| <= m - t exactly.
    Exactness {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        t: u32,
    },
    /// Worst-case error bounds in the Haar wavelet space.
    Wce(WceArgs),
    /// Fractional discrepancy D*.
    Discrepancy(DiscrepancyArgs),
    /// Extremal function for the sharp Koksma-Hlawka inequality.
    Sharpness(SharpnessArgs),
    /// Run the experiments of a config file and write CSV tables.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Write every table to this file instead of the configured outputs.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        tol: Option<f64>,
        /// Fill the `seconds` column with wall-clock timings.
        #[arg(long)]
        timing: bool,
    },
}

#[derive(Subcommand)]
enum NetCommand {
    Gen {
        #[arg(long, value_enum)]
        kind: NetKind,
        #[arg(long)]
        b: u32,
        #[arg(long)]
        m: u32,
        #[arg(long, default_value_t = 1)]
        s: usize,
        #[arg(long)]
        matrices: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    Verify {
        #[arg(long = "in")]
        input: PathBuf,
        /// Check this t instead of computing the smallest one.
        #[arg(long)]
        t: Option<u32>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum NetKind {
    Vdc,
    Faure,
    Matrices,
}

#[derive(Clone, Copy, ValueEnum)]
enum WceMode {
    Upper,
    Lower,
    Hilbert,
}

#[derive(Args)]
struct WceArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    alpha: f64,
    #[arg(long, value_parser = parse_exponent)]
    p: Exponent,
    #[arg(long, value_parser = parse_exponent)]
    q: Exponent,
    #[arg(long)]
    jmax: Option<u32>,
    #[arg(long, value_enum, default_value = "upper")]
    mode: WceMode,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Warnock,
    Quad,
    Mc,
}

#[derive(Args)]
struct DiscrepancyArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    alpha: f64,
    #[arg(long, value_parser = parse_exponent)]
    pprime: Exponent,
    #[arg(long, value_parser = parse_exponent)]
    qprime: Exponent,
    #[arg(long, value_enum)]
    method: MethodArg,
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Monte Carlo sample count.
    #[arg(long, default_value_t = 1 << 20)]
    samples: usize,
}

#[derive(Args)]
struct SharpnessArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    alpha: f64,
    #[arg(long, value_parser = parse_exponent)]
    p: Exponent,
    #[arg(long, value_parser = parse_exponent)]
    q: Exponent,
    #[arg(long, default_value_t = 128)]
    panels: usize,
}

fn parse_exponent(s: &str) -> Result<Exponent, String> {
    s.parse::<Exponent>().map_err(|e| e.to_string())
}

fn read_net(path: &Path) -> Result<PointSet, CliError> {
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    Ok(io::read_point_set(BufReader::new(file))?)
}

fn space(p: &PointSet, alpha: f64, pe: Exponent, qe: Exponent) -> Result<SpaceParams, CliError> {
    let sp = SpaceParams::new(p.base(), p.dim(), alpha, pe, qe)?;
    Ok(sp)
}

fn net_command(cmd: NetCommand) -> Result<(), CliError> {
    match cmd {
        NetCommand::Gen { kind, b, m, s, matrices, out } => {
            let p = match kind {
                NetKind::Vdc => {
                    if s != 1 {
                        return Err(CliError::Validation("the van der Corput generator needs s = 1".into()));
                    }
                    van_der_corput(b, m)?
                }
                NetKind::Faure => faure_net(b, m, s)?,
                NetKind::Matrices => {
                    let path = matrices.ok_or_else(|| CliError::Validation("--kind matrices needs --matrices FILE".into()))?;
                    let file = File::open(&path).map_err(|e| CliError::io(&path, e))?;
                    let g = io::read_matrices(BufReader::new(file), b, m as usize)?;
                    if g.dim() != s {
                        return Err(CliError::Validation(format!("{} holds {} matrices, expected s = {s}", path.display(), g.dim())));
                    }
                    digital_net(&g)?
                }
            };
            let file = File::create(&out).map_err(|e| CliError::io(&out, e))?;
            let mut w = BufWriter::new(file);
            io::write_point_set(&p, &mut w)?;
            w.flush().map_err(|e| CliError::io(&out, e))?;
        }
        NetCommand::Verify { input, t } => {
            let p = read_net(&input)?;
            let t = match t {
                Some(t) => t,
                None => t_value(&p)?,
            };
            let cert = verify_net(&p, t)?;
            println!("b={} m={} s={} t={} verified={}", cert.base, cert.m, cert.s, cert.t, cert.verified);
            match cert.witness {
                Some(w) => println!("witness j={:?} k={:?} count={}", w.j, w.k, w.count),
                None => println!("witness none"),
            }
        }
    }
    Ok(())
}

fn run() -> Result<(), CliError> {
    let cli = Cli::parse();
    match cli.command {
        Command::Net(cmd) => net_command(cmd)?,
        Command::Exactness { input, t } => {
            let p = read_net(&input)?;
            let r = exactness_report(&p, t)?;
            println!("max_deviation {} ({})", r.max_deviation, r.max_deviation.to_f64());
            println!("level {} indices {}", r.level, r.indices);
            match r.witness {
                Some(w) => println!("witness j={:?} k={:?} i={:?}", w.j(), w.k(), w.i()),
                None => println!("witness none"),
            }
        }
        Command::Wce(a) => {
            let p = read_net(&a.input)?;
            let sp = space(&p, a.alpha, a.p, a.q)?;
            match a.mode {
                WceMode::Upper => {
                    let w = experiment::upper(&p, &sp, a.jmax)?;
                    println!("{} {} {}", w.truncated, w.tail, w.total);
                    if w.generic_tail {
                        eprintln!("note: not a verified net; the tail uses the generic per-cell cap");
                    }
                }
                WceMode::Lower => println!("{}", experiment::lower(&p, &sp)?),
                WceMode::Hilbert => {
                    config::check_method(config::Method::Hilbert, &sp).map_err(CliError::Validation)?;
                    println!("{}", experiment::hilbert(&p, sp.alpha)?);
                }
            }
        }
        Command::Discrepancy(a) => {
            let p = read_net(&a.input)?;
            let method = match a.method {
                MethodArg::Warnock => DiscrepancyMethod::Warnock,
                MethodArg::Quad => DiscrepancyMethod::TensorQuad,
                MethodArg::Mc => DiscrepancyMethod::MonteCarlo { samples: a.samples, seed: a.seed },
            };
            let r = frac_discrepancy(&p, a.alpha, a.pprime, a.qprime, method, a.tol)?;
            println!("{} {:e}", r.value, r.error_estimate);
        }
        Command::Sharpness(a) => {
            let p = read_net(&a.input)?;
            let sp = space(&p, a.alpha, a.p, a.q)?;
            let (ratio, dstar) = experiment::sharpness(&p, &sp, a.panels)?;
            println!("{ratio} {dstar}");
        }
        Command::Run { config: path, out, seed, tol, timing } => {
            let cfgs = config::load(&path, &Overrides { output: out, seed, tol, timing })?;
            let report = experiment::run_all(&cfgs)?;
            let mut to_stdout = false;
            for (target, text) in &report.outputs {
                match target {
                    Some(file) => std::fs::write(file, text).map_err(|e| CliError::io(file, e))?,
                    None => {
                        to_stdout = true;
                        print!("{text}");
                    }
                }
            }
            for line in &report.summary {
                if to_stdout {
                    eprintln!("{line}");
                } else {
                    println!("{line}");
                }
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
