//! Norm and spectral-radius tables over the (mode, penalty, window-length,
//! window-count) grid: spectral radius against its contraction bound for
//! the lowest and highest modes, plus the bound's profile across the whole
//! mode ladder.

use std::path::Path;

use serde_json::json;
use tpschwarz_core::model::SpatialGrid;
use tpschwarz_core::modes::{coefficients, eigenbasis};
use tpschwarz_core::theory::{
    infinity_norm_closed_form, rho_tilde, spectral_radius, IterationMatrix,
};

use super::{ensure_dir, write_manifest, write_table, ExperimentError, Timings};
use crate::config::ExperimentConfig;
use crate::csvout::{fmt_param, Table};

/// Slack for the radius-vs-bound cross-check; the bound itself is exact,
/// the slack only absorbs eigensolver rounding.
const BOUND_SLACK: f64 = 1e-10;

pub struct BoundsSummary {
    /// (mode, nu, dt, windows, rho, sqrt_rho_tilde) per table row.
    pub rows: Vec<(usize, f64, f64, usize, f64, f64)>,
    pub outputs: Vec<String>,
}

pub fn run(cfg: &ExperimentConfig, out_dir: &Path) -> Result<BoundsSummary, ExperimentError> {
    let m_points = cfg.interior_points.unwrap_or(128);
    let nu_values = cfg.nu_values.clone().unwrap_or_else(|| vec![1e-1, 1e-2, 1e-4]);
    let dt_values = cfg.dt_values.clone().unwrap_or_else(|| vec![1.0, 0.25, 0.0625, 0.0078125]);
    let window_counts =
        cfg.window_counts.clone().unwrap_or_else(|| vec![2, 4, 8, 16, 32, 64, 128]);
    let mode_indices = cfg.mode_indices.clone().unwrap_or_else(|| vec![1, m_points]);
    validate(m_points, &nu_values, &dt_values, &window_counts, &mode_indices)?;

    ensure_dir(out_dir)?;
    let basis = eigenbasis(&SpatialGrid { domain_length: 1.0, interior_points: m_points });
    let mut timings = Timings::new();
    let mut outputs = Vec::new();
    let mut rows = Vec::new();
    let mut violations: Vec<String> = Vec::new();

    timings.time("norm_tables", || -> Result<(), ExperimentError> {
        for &nu in &nu_values {
            for &dt in &dt_values {
                for &m in &mode_indices {
                    let c = coefficients(basis.lambda(m - 1), nu, dt)
                        .map_err(ExperimentError::numerical)?;
                    let rt = rho_tilde(&c);
                    let bound = rt.sqrt();
                    let inf = infinity_norm_closed_form(&c);
                    if rt > 1.0 - BOUND_SLACK {
                        violations
                            .push(format!("rho_tilde {rt} not below one at m={m} nu={nu} dt={dt}"));
                    }
                    let mut table =
                        Table::new("N,rho,sqrt_rho_tilde,rho_tilde,inf_norm");
                    for &n in &window_counts {
                        let matrix = IterationMatrix::assemble(c, n)
                            .map_err(ExperimentError::numerical)?;
                        let rho =
                            spectral_radius(&matrix).map_err(ExperimentError::numerical)?;
                        if rho > bound + BOUND_SLACK {
                            violations.push(format!(
                                "rho {rho} above bound {bound} at m={m} nu={nu} dt={dt} N={n}"
                            ));
                        }
                        table.row(&[n.into(), rho.into(), bound.into(), rt.into(), inf.into()]);
                        rows.push((m, nu, dt, n, rho, bound));
                    }
                    let name = format!(
                        "bounds_norms_m{m}_nu{}_dt{}.csv",
                        fmt_param(nu),
                        fmt_param(dt)
                    );
                    outputs.push(write_table(out_dir, name, &table)?);
                }
            }
        }
        Ok(())
    })?;

    timings.time("mode_profiles", || -> Result<(), ExperimentError> {
        for &nu in &nu_values {
            for &dt in &dt_values {
                let mut table = Table::new("m,lambda,rho_tilde,sqrt_rho_tilde,inf_norm");
                for m in 1..=m_points {
                    let c = coefficients(basis.lambda(m - 1), nu, dt)
                        .map_err(ExperimentError::numerical)?;
                    let rt = rho_tilde(&c);
                    if rt > 1.0 - BOUND_SLACK {
                        violations
                            .push(format!("rho_tilde {rt} not below one at m={m} nu={nu} dt={dt}"));
                    }
                    table.row(&[
                        m.into(),
                        basis.lambda(m - 1).into(),
                        rt.into(),
                        rt.sqrt().into(),
                        infinity_norm_closed_form(&c).into(),
                    ]);
                }
                let name = format!(
                    "bounds_rho_tilde_vs_m_nu{}_dt{}.csv",
                    fmt_param(nu),
                    fmt_param(dt)
                );
                outputs.push(write_table(out_dir, name, &table)?);
            }
        }
        Ok(())
    })?;

    if !violations.is_empty() {
        return Err(ExperimentError::Numerical(format!(
            "{} bound violations, first: {}",
            violations.len(),
            violations[0]
        )));
    }

    let notes = smoothing_notes(&rows, &mode_indices);
    let parameters = json!({
        "interior_points": m_points,
        "nu_values": nu_values,
        "dt_values": dt_values,
        "window_counts": window_counts,
        "mode_indices": mode_indices,
    });
    write_manifest(
        out_dir,
        "bounds",
        cfg.seed.unwrap_or(0),
        parameters,
        &outputs,
        timings,
        notes,
    )?;
    Ok(BoundsSummary { rows, outputs })
}

fn validate(
    m_points: usize,
    nu_values: &[f64],
    dt_values: &[f64],
    window_counts: &[usize],
    mode_indices: &[usize],
) -> Result<(), ExperimentError> {
    if m_points == 0 {
        return Err(ExperimentError::Invalid("interior_points must be positive".into()));
    }
    if nu_values.is_empty() || dt_values.is_empty() || window_counts.is_empty() {
        return Err(ExperimentError::Invalid("parameter grids must be nonempty".into()));
    }
    if nu_values.iter().any(|&v| !(v > 0.0)) || dt_values.iter().any(|&v| !(v > 0.0)) {
        return Err(ExperimentError::Invalid("nu and dt values must be positive".into()));
    }
    if window_counts.iter().any(|&n| n < 2) {
        return Err(ExperimentError::Invalid("window counts must be at least 2".into()));
    }
    if mode_indices.is_empty() || mode_indices.iter().any(|&m| m == 0 || m > m_points) {
        return Err(ExperimentError::Invalid(format!(
            "mode indices must lie in 1..={m_points}"
        )));
    }
    Ok(())
}

/// High modes must contract much faster than low ones; record the measured
/// ratio per (nu, dt) pair when both ends of the ladder were sampled.
fn smoothing_notes(
    rows: &[(usize, f64, f64, usize, f64, f64)],
    mode_indices: &[usize],
) -> Vec<String> {
    let lo = *mode_indices.iter().min().unwrap();
    let hi = *mode_indices.iter().max().unwrap();
    if lo == hi {
        return Vec::new();
    }
    let mut notes = Vec::new();
    let mut pairs: Vec<(f64, f64)> = Vec::new();
    for &(m, nu, dt, _, _, _) in rows {
        if m == lo && !pairs.contains(&(nu, dt)) {
            pairs.push((nu, dt));
        }
    }
    for (nu, dt) in pairs {
        let max_rho = |mode: usize| {
            rows.iter()
                .filter(|r| r.0 == mode && r.1 == nu && r.2 == dt)
                .map(|r| r.4)
                .fold(0.0f64, f64::max)
        };
        let low = max_rho(lo);
        let high = max_rho(hi);
        notes.push(format!(
            "smoothing at nu={nu} dt={dt}: max rho over N is {low:.3e} for mode {lo} versus {high:.3e} for mode {hi}"
        ));
    }
    notes
}
