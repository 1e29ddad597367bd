//! Run configuration: defaults, then an optional JSON file, then flags.

use crate::error::{CliError, CliResult};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Dimension `n`.
    pub dim: usize,
    /// Degree cap `K` of spectral expansions.
    pub degree: u32,
    /// Gauss–Hermite order for heat-semigroup quadrature.
    pub order: usize,
    /// Acceptance tolerance on `|spectral - pv|`.
    pub tol: f64,
    /// Region `β`; kernels split inside `N_β`, certificates use it as a region override.
    pub beta: Option<f64>,
    /// Envelope exponent `η`.
    pub eta: f64,
    /// Seed for certification sample grids.
    pub seed: u64,
    pub out: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig { dim: 1, degree: 24, order: 48, tol: 1e-5, beta: None, eta: 0.75, seed: 1729, out: None }
    }
}

/// Fields a config file may set; anything missing keeps its default.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub dim: Option<usize>,
    pub degree: Option<u32>,
    pub order: Option<usize>,
    pub tol: Option<f64>,
    pub beta: Option<f64>,
    pub eta: Option<f64>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
}

/// Values given on the command line.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub dim: Option<usize>,
    pub degree: Option<u32>,
    pub order: Option<usize>,
    pub tol: Option<f64>,
    pub beta: Option<f64>,
    pub eta: Option<f64>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
}

/// Region `β` used for kernel splitting when none is configured.
pub const DEFAULT_SPLIT_BETA: f64 = 4.0 / 3.0;

impl RunConfig {
    pub fn resolve(file: Option<&Path>, flags: &Overrides) -> CliResult<RunConfig> {
        let mut cfg = RunConfig::default();
        if let Some(path) = file {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
            let f: ConfigFile = serde_json::from_str(&text)
                .map_err(|e| CliError::Usage(format!("malformed config {}: {e}", path.display())))?;
            cfg.apply(&Overrides {
                dim: f.dim,
                degree: f.degree,
                order: f.order,
                tol: f.tol,
                beta: f.beta,
                eta: f.eta,
                seed: f.seed,
                out: f.out,
            });
        }
        cfg.apply(flags);
        cfg.validate()?;
        Ok(cfg)
    }

    fn apply(&mut self, o: &Overrides) {
        if let Some(v) = o.dim {
            self.dim = v;
        }
        if let Some(v) = o.degree {
            self.degree = v;
        }
        if let Some(v) = o.order {
            self.order = v;
        }
        if let Some(v) = o.tol {
            self.tol = v;
        }
        if o.beta.is_some() {
            self.beta = o.beta;
        }
        if let Some(v) = o.eta {
            self.eta = v;
        }
        if let Some(v) = o.seed {
            self.seed = v;
        }
        if o.out.is_some() {
            self.out = o.out.clone();
        }
    }

    pub fn validate(&self) -> CliResult<()> {
        if !(1..=3).contains(&self.dim) {
            return Err(CliError::Usage(format!("dimension must lie in 1..=3, got {}", self.dim)));
        }
        if self.degree > 60 {
            return Err(CliError::Usage(format!("degree cap must be at most 60, got {}", self.degree)));
        }
        if !(1..=256).contains(&self.order) {
            return Err(CliError::Usage(format!("quadrature order must lie in 1..=256, got {}", self.order)));
        }
        if !(self.tol >= 1e-12) || !self.tol.is_finite() {
            return Err(CliError::Usage(format!("tolerance must be at least 1e-12, got {}", self.tol)));
        }
        if let Some(b) = self.beta {
            if !(b > 0.0) || !b.is_finite() {
                return Err(CliError::Usage(format!("β must be positive, got {b}")));
            }
        }
        if !(self.eta > 0.0 && self.eta <= 1.0) {
            return Err(CliError::Usage(format!("η must lie in (0, 1], got {}", self.eta)));
        }
        Ok(())
    }

    pub fn split_beta(&self) -> f64 {
        self.beta.unwrap_or(DEFAULT_SPLIT_BETA)
    }
}
