//! JSON configuration files. Each file carries a versioned `schema` tag
//! and unknown keys are rejected, so typos fail fast instead of silently
//! falling back to defaults.

use std::fmt;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use tpschwarz_core::model::ProblemSpec;

pub const PROBLEM_SCHEMA: &str = "tpschwarz-problem/1";
pub const EXPERIMENT_SCHEMA: &str = "tpschwarz-experiment/1";

/// Named driving data for a solve: the target trajectory and initial state.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scenario {
    /// Closed-form optimality-system pair; exact errors are measurable.
    Manufactured,
    /// Periodic mid-domain Gaussian heating target, starting from rest.
    Heatcool,
    /// Zero target and zero initial state.
    Zero,
}

impl Scenario {
    pub fn name(self) -> &'static str {
        match self {
            Scenario::Manufactured => "manufactured",
            Scenario::Heatcool => "heatcool",
            Scenario::Zero => "zero",
        }
    }
}

/// One solver problem, as read from a JSON file.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub schema: String,
    pub domain_length: f64,
    pub horizon: f64,
    pub nu: f64,
    pub windows: usize,
    pub steps_per_window: usize,
    pub interior_points: usize,
    pub scenario: Scenario,
}

impl ProblemConfig {
    pub fn from_path(path: &Path) -> Result<Self, ConfigError> {
        let cfg: ProblemConfig = read_json(path)?;
        check_schema(path, &cfg.schema, PROBLEM_SCHEMA)?;
        Ok(cfg)
    }

    pub fn spec(&self) -> ProblemSpec {
        ProblemSpec {
            domain_length: self.domain_length,
            horizon: self.horizon,
            nu: self.nu,
            windows: self.windows,
            steps_per_window: self.steps_per_window,
            interior_points: self.interior_points,
        }
    }
}

/// Parameter overrides for an experiment runner. Every field is optional;
/// whatever is left out keeps the runner's published default grid, so a
/// minimal file is `{"schema": "tpschwarz-experiment/1"}`.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema: String,
    #[serde(default)]
    pub interior_points: Option<usize>,
    #[serde(default)]
    pub nu_values: Option<Vec<f64>>,
    #[serde(default)]
    pub dt_values: Option<Vec<f64>>,
    #[serde(default)]
    pub window_counts: Option<Vec<usize>>,
    /// Mesh-refinement exponents e, meaning h = 2^-e.
    #[serde(default)]
    pub mesh_exponents: Option<Vec<u32>>,
    /// 1-based spatial mode indices.
    #[serde(default)]
    pub mode_indices: Option<Vec<usize>>,
    #[serde(default)]
    pub eps: Option<f64>,
    #[serde(default)]
    pub theta_samples: Option<usize>,
    #[serde(default)]
    pub tol: Option<f64>,
    #[serde(default)]
    pub max_iters: Option<usize>,
    #[serde(default)]
    pub seed: Option<u64>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            schema: EXPERIMENT_SCHEMA.to_string(),
            interior_points: None,
            nu_values: None,
            dt_values: None,
            window_counts: None,
            mesh_exponents: None,
            mode_indices: None,
            eps: None,
            theta_samples: None,
            tol: None,
            max_iters: None,
            seed: None,
        }
    }
}

impl ExperimentConfig {
    pub fn from_path(path: &Path) -> Result<Self, ConfigError> {
        let cfg: ExperimentConfig = read_json(path)?;
        check_schema(path, &cfg.schema, EXPERIMENT_SCHEMA)?;
        Ok(cfg)
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, ConfigError> {
    let raw = fs::read_to_string(path)
        .map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })?;
    serde_json::from_str(&raw)
        .map_err(|source| ConfigError::Parse { path: path.to_path_buf(), source })
}

fn check_schema(path: &Path, got: &str, want: &'static str) -> Result<(), ConfigError> {
    if got == want {
        Ok(())
    } else {
        Err(ConfigError::Schema { path: path.to_path_buf(), got: got.to_string(), want })
    }
}

#[derive(Debug)]
pub enum ConfigError {
    Io { path: PathBuf, source: io::Error },
    Parse { path: PathBuf, source: serde_json::Error },
    Schema { path: PathBuf, got: String, want: &'static str },
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::Io { path, source } => {
                write!(f, "cannot read config {}: {source}", path.display())
            }
            ConfigError::Parse { path, source } => {
                write!(f, "cannot parse config {}: {source}", path.display())
            }
            ConfigError::Schema { path, got, want } => {
                write!(f, "config {} has schema {got:?}, expected {want:?}", path.display())
            }
        }
    }
}

impl std::error::Error for ConfigError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            ConfigError::Io { source, .. } => Some(source),
            ConfigError::Parse { source, .. } => Some(source),
            ConfigError::Schema { .. } => None,
        }
    }
}
