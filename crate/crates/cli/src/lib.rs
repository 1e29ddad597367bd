//! Command-line surface: `apply`, `kernel`, `certify`, `pv-sweep`, `show-config`.
//!
//! Exit codes: 0 success, 1 tolerance or certificate failure, 2 usage or config error.

pub mod commands;
pub mod config;
pub mod error;
pub mod ops;

use clap::{Args, Parser, Subcommand};
use commands::{CertifyArgs, KernelGrid, Report};
use config::{Overrides, RunConfig};
use error::{CliError, CliResult};
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

#[derive(Debug, Parser)]
#[command(name = "igauss", version, about = "Operators of the inverse Gaussian setting: spectral vs kernel evaluation, kernel dumps, estimate certificates")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Clone, Default)]
pub struct Common {
    /// JSON file with run configuration; flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Dimension n (1..=3).
    #[arg(long, global = true)]
    pub dim: Option<usize>,
    /// Degree cap K of spectral expansions (≤ 60).
    #[arg(long, global = true)]
    pub degree: Option<u32>,
    /// Gauss–Hermite order for semigroup quadrature.
    #[arg(long, global = true)]
    pub order: Option<usize>,
    /// Tolerance (≥ 1e-12).
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Region β.
    #[arg(long, global = true)]
    pub beta: Option<f64>,
    /// Envelope exponent η.
    #[arg(long, global = true)]
    pub eta: Option<f64>,
    /// Seed for certification grids.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output file (stdout when absent); written atomically.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Apply an operator spectrally and through its kernel; CSV comparison.
    Apply {
        /// heat:t, neg-power:β, riesz:α, riesz-bar:α or imaginary:γ (α as `1,0`).
        #[arg(long)]
        op: String,
        /// Function JSON {"dim", "terms": [{"exponents", "coeff_re", "coeff_im"}]}.
        #[arg(long)]
        input: PathBuf,
        /// Points JSON: [[x1, …], …].
        #[arg(long)]
        points: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Dump a kernel on a lattice of pairs as CSV.
    Kernel {
        /// mehler:t, neg-power:β, kbar:β, riesz:α, riesz-bar:α, classical-riesz:α or imaginary:γ.
        #[arg(long)]
        kernel: String,
        #[arg(long, default_value_t = -3.0, allow_hyphen_values = true)]
        lo: f64,
        #[arg(long, default_value_t = 3.0, allow_hyphen_values = true)]
        hi: f64,
        #[arg(long, default_value_t = 21)]
        count: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Calibrate and verify one kernel estimate; JSON certificate.
    Certify {
        /// Estimate id, e.g. mbeta-global, riesz-local-diff, schur-local.
        #[arg(long)]
        estimate: String,
        /// α (or ℓ) as `1,0`; defaults to e¹.
        #[arg(long)]
        alpha: Option<String>,
        #[arg(long)]
        gamma: Option<f64>,
        /// Power β of the M_β kernel.
        #[arg(long)]
        power: Option<f64>,
        /// Gaussian constant c.
        #[arg(long)]
        c: Option<f64>,
        /// Weight exponent q of the global Schur row.
        #[arg(long)]
        q: Option<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// ε-ladder of a principal value at one point.
    PvSweep {
        #[arg(long)]
        op: String,
        #[arg(long)]
        input: PathBuf,
        /// Point as `0.3` or `0.3,-0.2`.
        #[arg(long, allow_hyphen_values = true)]
        point: String,
        #[command(flatten)]
        common: Common,
    },
    /// Print the resolved configuration.
    ShowConfig {
        #[command(flatten)]
        common: Common,
    },
}

impl Common {
    pub fn resolve(&self) -> CliResult<RunConfig> {
        let flags = Overrides {
            dim: self.dim,
            degree: self.degree,
            order: self.order,
            tol: self.tol,
            beta: self.beta,
            eta: self.eta,
            seed: self.seed,
            out: self.out.clone(),
        };
        RunConfig::resolve(self.config.as_deref(), &flags)
    }
}

fn read(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))
}

/// Writes `bytes` to `path` through a temporary file in the same directory and a rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> CliResult<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.flush()?;
    tmp.persist(path).map_err(|e| CliError::Io(e.error))?;
    Ok(())
}

fn emit(cfg: &RunConfig, report: &Report) -> CliResult<()> {
    match &cfg.out {
        Some(p) => write_atomic(p, &report.body)?,
        None => std::io::stdout().write_all(&report.body)?,
    }
    for n in &report.notes {
        eprintln!("{n}");
    }
    Ok(())
}

pub fn run(cli: Cli) -> CliResult<bool> {
    let (cfg, report) = match cli.command {
        Command::Apply { op, input, points, common } => {
            let cfg = common.resolve()?;
            let pts = commands::parse_points(&read(&points)?, cfg.dim)?;
            let r = commands::cmd_apply(&cfg, &op, &read(&input)?, &pts)?;
            (cfg, r)
        }
        Command::Kernel { kernel, lo, hi, count, common } => {
            let cfg = common.resolve()?;
            let r = commands::cmd_kernel(&cfg, &kernel, &KernelGrid { lo, hi, count })?;
            (cfg, r)
        }
        Command::Certify { estimate, alpha, gamma, power, c, q, common } => {
            let cfg = common.resolve()?;
            let (r, _) = commands::cmd_certify(&cfg, &estimate, &CertifyArgs { alpha, gamma, power, c, q })?;
            (cfg, r)
        }
        Command::PvSweep { op, input, point, common } => {
            let cfg = common.resolve()?;
            let x = commands::parse_point(&point, cfg.dim)?;
            let r = commands::cmd_pv_sweep(&cfg, &op, &read(&input)?, &x)?;
            (cfg, r)
        }
        Command::ShowConfig { common } => {
            let cfg = common.resolve()?;
            let r = commands::cmd_show_config(&cfg)?;
            (cfg, r)
        }
    };
    emit(&cfg, &report)?;
    Ok(report.ok)
}

/// Parses `args` and runs; returns the process exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match run(cli) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
