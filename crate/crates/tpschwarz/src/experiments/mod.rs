//! Scripted scenario runners regenerating the study's figure data. Every
//! runner is deterministic given its config, writes CSVs plus a
//! `manifest.json`, and fails loudly when a cross-check between computed
//! data and the coupling-coefficient theory is violated. Timings go only
//! into the manifest so the CSVs stay byte-identical across reruns.

pub mod bounds;
pub mod clustering;
pub mod cn_order;
pub mod heatcool;
pub mod weak_scaling;

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use crate::csvout::Table;

pub const MANIFEST_SCHEMA: &str = "tpschwarz-manifest/1";

#[derive(Debug)]
pub enum ExperimentError {
    /// Bad grids or options: a usage problem.
    Invalid(String),
    /// A numerical cross-check failed or a solve broke down.
    Numerical(String),
    Io { path: PathBuf, source: io::Error },
}

impl ExperimentError {
    pub(crate) fn numerical(msg: impl fmt::Display) -> Self {
        ExperimentError::Numerical(msg.to_string())
    }
}

impl fmt::Display for ExperimentError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExperimentError::Invalid(msg) => write!(f, "invalid experiment config: {msg}"),
            ExperimentError::Numerical(msg) => write!(f, "numerical failure: {msg}"),
            ExperimentError::Io { path, source } => {
                write!(f, "cannot write {}: {source}", path.display())
            }
        }
    }
}

impl std::error::Error for ExperimentError {}

/// Per-phase wall-clock bookkeeping for the manifest.
#[derive(Default)]
pub struct Timings(BTreeMap<String, u128>);

impl Timings {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn time<T>(&mut self, name: &str, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = f();
        self.0.insert(name.to_string(), start.elapsed().as_millis());
        out
    }

    fn into_map(self) -> BTreeMap<String, u128> {
        self.0
    }
}

#[derive(Serialize)]
pub struct Manifest {
    pub schema: &'static str,
    pub experiment: &'static str,
    pub crate_version: &'static str,
    pub seed: u64,
    pub parameters: serde_json::Value,
    pub outputs: Vec<String>,
    pub timings_ms: BTreeMap<String, u128>,
    pub notes: Vec<String>,
}

pub(crate) fn write_manifest(
    out_dir: &Path,
    experiment: &'static str,
    seed: u64,
    parameters: serde_json::Value,
    outputs: &[String],
    timings: Timings,
    notes: Vec<String>,
) -> Result<(), ExperimentError> {
    let manifest = Manifest {
        schema: MANIFEST_SCHEMA,
        experiment,
        crate_version: env!("CARGO_PKG_VERSION"),
        seed,
        parameters,
        outputs: outputs.to_vec(),
        timings_ms: timings.into_map(),
        notes,
    };
    let path = out_dir.join("manifest.json");
    let mut body = serde_json::to_string_pretty(&manifest).expect("manifest serialization");
    body.push('\n');
    fs::write(&path, body).map_err(|source| ExperimentError::Io { path, source })
}

pub(crate) fn ensure_dir(dir: &Path) -> Result<(), ExperimentError> {
    fs::create_dir_all(dir)
        .map_err(|source| ExperimentError::Io { path: dir.to_path_buf(), source })
}

/// Writes one table into the output directory, returning the file name for
/// the manifest's output list.
pub(crate) fn write_table(
    dir: &Path,
    name: String,
    table: &Table,
) -> Result<String, ExperimentError> {
    let path = dir.join(&name);
    table.write_to(&path).map_err(|source| ExperimentError::Io { path, source })?;
    Ok(name)
}

/// Least-squares slope of y against x.
pub(crate) fn ls_slope(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        num += (x - mx) * (y - my);
        den += (x - mx) * (x - mx);
    }
    num / den
}

/// Asymptotic per-iteration contraction from an error history: geometric
/// mean over the trailing ratios, using an even number of steps so the
/// two-cycle induced by conjugate-imaginary spectra averages out.
pub(crate) fn geometric_decay(errors: &[f64]) -> Option<f64> {
    let n = errors.len();
    let span = if n >= 5 {
        4
    } else if n >= 3 {
        2
    } else {
        return None;
    };
    let first = errors[n - 1 - span];
    let last = errors[n - 1];
    if first > 0.0 && last > 0.0 {
        Some((last / first).powf(1.0 / span as f64))
    } else {
        None
    }
}
