//! Experiment configuration: TOML file values overridden by flags.

use serde::Deserialize;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("cannot parse config {path}: {source}")]
    Parse { path: PathBuf, source: Box<toml::de::Error> },
    #[error("lambda must be positive and finite, got {0}")]
    Lambda(f64),
    #[error("the coupling e must be a nonzero real number, got {0}")]
    Coupling(f64),
    #[error("{0}")]
    Invalid(String),
}

/// Everything an experiment may read. Unset fields take per-experiment defaults.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Option<String>,
    pub lambda_schedule: Option<Vec<f64>>,
    pub resolution: Option<usize>,
    pub tolerance: Option<f64>,
    pub coupling: Option<f64>,
    pub seed: Option<u64>,
    pub algebra: Option<String>,
    pub signs: Option<Vec<i8>>,
    pub irreps: Option<Vec<String>>,
    pub dim: Option<usize>,
    pub max_iterations: Option<usize>,
    pub output_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read { path: path.into(), source })?;
        toml::from_str(&text).map_err(|source| ConfigError::Parse { path: path.into(), source: Box::new(source) })
    }

    /// Fields set in `over` win.
    pub fn merged(self, over: ExperimentConfig) -> Self {
        ExperimentConfig {
            experiment: over.experiment.or(self.experiment),
            lambda_schedule: over.lambda_schedule.or(self.lambda_schedule),
            resolution: over.resolution.or(self.resolution),
            tolerance: over.tolerance.or(self.tolerance),
            coupling: over.coupling.or(self.coupling),
            seed: over.seed.or(self.seed),
            algebra: over.algebra.or(self.algebra),
            signs: over.signs.or(self.signs),
            irreps: over.irreps.or(self.irreps),
            dim: over.dim.or(self.dim),
            max_iterations: over.max_iterations.or(self.max_iterations),
            output_dir: over.output_dir.or(self.output_dir),
        }
    }

    pub fn schedule(&self, default: &[f64]) -> Result<Vec<f64>, ConfigError> {
        let s = self.lambda_schedule.clone().unwrap_or_else(|| default.to_vec());
        if s.is_empty() {
            return Err(ConfigError::Invalid("lambda schedule is empty".into()));
        }
        for &l in &s {
            if !(l > 0.0 && l.is_finite()) {
                return Err(ConfigError::Lambda(l));
            }
        }
        Ok(s)
    }

    pub fn coupling(&self) -> Result<f64, ConfigError> {
        let e = self.coupling.unwrap_or(1.0);
        if e == 0.0 || !e.is_finite() {
            return Err(ConfigError::Coupling(e));
        }
        Ok(e)
    }

    pub fn resolution(&self, default: usize) -> Result<usize, ConfigError> {
        match self.resolution.unwrap_or(default) {
            0 => Err(ConfigError::Invalid("resolution must be positive".into())),
            n => Ok(n),
        }
    }

    pub fn tolerance(&self, default: f64) -> Result<f64, ConfigError> {
        let t = self.tolerance.unwrap_or(default);
        if !(t > 0.0) {
            return Err(ConfigError::Invalid(format!("tolerance must be positive, got {t}")));
        }
        Ok(t)
    }

    pub fn output_dir(&self) -> PathBuf {
        self.output_dir.clone().unwrap_or_else(|| PathBuf::from("reports"))
    }
}

/// Comma-separated positive reals, e.g. `2,10,100`.
pub fn parse_schedule(s: &str) -> Result<Vec<f64>, String> {
    s.split(',').map(|t| t.trim().parse::<f64>().map_err(|e| format!("bad lambda `{t}`: {e}"))).collect()
}

pub fn parse_signs(s: &str) -> Result<Vec<i8>, String> {
    s.split(',').map(|t| t.trim().parse::<i8>().map_err(|e| format!("bad sign `{t}`: {e}"))).collect()
}
