//! Eigenvalue scatter data against the symbol curves: per-window-count
//! spectra with region membership and curve distances, plus clustering
//! summaries showing the outside-band share shrink to zero.

use std::path::Path;

use serde_json::json;
use tpschwarz_core::model::SpatialGrid;
use tpschwarz_core::modes::{coefficients, eigenbasis};
use tpschwarz_core::theory::{eigenvalue_detail, spectrum_report, SpectrumRow};

use super::{ensure_dir, write_manifest, write_table, ExperimentError, Timings};
use crate::config::ExperimentConfig;
use crate::csvout::{fmt_param, Table};

/// Membership slack for the containment cross-check: the region test is
/// closed-form, the slack only absorbs eigensolver rounding.
const REGION_TOL: f64 = 1e-10;

pub struct ClusterSet {
    pub mode: usize,
    pub nu: f64,
    pub dt: f64,
    pub rows: Vec<SpectrumRow>,
}

pub struct ClusteringSummary {
    pub sets: Vec<ClusterSet>,
    pub outputs: Vec<String>,
}

pub fn run(cfg: &ExperimentConfig, out_dir: &Path) -> Result<ClusteringSummary, ExperimentError> {
    let m_points = cfg.interior_points.unwrap_or(128);
    let nu_values = cfg.nu_values.clone().unwrap_or_else(|| vec![1e-2, 1e-4]);
    let dt_values = cfg.dt_values.clone().unwrap_or_else(|| vec![1.0 / 128.0]);
    let window_counts =
        cfg.window_counts.clone().unwrap_or_else(|| vec![16, 32, 64, 128, 256, 512]);
    let mode_indices = cfg.mode_indices.clone().unwrap_or_else(|| vec![1, m_points]);
    let eps = cfg.eps.unwrap_or(1e-2);
    let theta_samples = cfg.theta_samples.unwrap_or(2001);
    if m_points == 0 || window_counts.iter().any(|&n| n < 2) {
        return Err(ExperimentError::Invalid(
            "need interior points and window counts of at least 2".into(),
        ));
    }
    if mode_indices.iter().any(|&m| m == 0 || m > m_points) {
        return Err(ExperimentError::Invalid(format!("mode indices must lie in 1..={m_points}")));
    }
    if !(eps > 0.0) || theta_samples < 3 {
        return Err(ExperimentError::Invalid(
            "eps must be positive and theta_samples at least 3".into(),
        ));
    }

    ensure_dir(out_dir)?;
    let basis = eigenbasis(&SpatialGrid { domain_length: 1.0, interior_points: m_points });
    let mut timings = Timings::new();
    let mut outputs = Vec::new();
    let mut sets = Vec::new();
    let mut notes = Vec::new();
    let mut outside_region = 0usize;
    let mut first_outside = String::new();

    for &nu in &nu_values {
        for &dt in &dt_values {
            for &m in &mode_indices {
                let c = coefficients(basis.lambda(m - 1), nu, dt)
                    .map_err(ExperimentError::numerical)?;
                let tag = format!("m{m}_nu{}_dt{}", fmt_param(nu), fmt_param(dt));
                let rows = timings.time(&format!("summary_{tag}"), || {
                    spectrum_report(&c, &window_counts, eps, theta_samples)
                        .map_err(ExperimentError::numerical)
                })?;
                let mut summary = Table::new(
                    "N,rho,rho_tilde,sqrt_rho_tilde,inf_norm,max_dist_sigmaT,frac_outside_eps",
                );
                for r in &rows {
                    summary.row(&[
                        r.windows.into(),
                        r.rho.into(),
                        r.rho_tilde.into(),
                        r.sqrt_rho_tilde.into(),
                        r.infinity_norm.into(),
                        r.max_distance.into(),
                        r.outside_fraction.into(),
                    ]);
                }
                outputs.push(write_table(
                    out_dir,
                    format!("clustering_summary_{tag}.csv"),
                    &summary,
                )?);

                for &n in &window_counts {
                    let detail = eigenvalue_detail(&c, n, theta_samples, REGION_TOL)
                        .map_err(ExperimentError::numerical)?;
                    let mut scatter = Table::new("re,im,in_region_D,dist_sigmaT");
                    for e in &detail {
                        if !e.in_region {
                            outside_region += 1;
                            if first_outside.is_empty() {
                                first_outside = format!(
                                    "eigenvalue {}+{}i escapes the region at {tag} N={n}",
                                    e.re, e.im
                                );
                            }
                        }
                        scatter.row(&[
                            e.re.into(),
                            e.im.into(),
                            e.in_region.into(),
                            e.distance.into(),
                        ]);
                    }
                    outputs.push(write_table(
                        out_dir,
                        format!("clustering_spectrum_{tag}_N{n}.csv"),
                        &scatter,
                    )?);
                }

                if let (Some(first), Some(last)) = (rows.first(), rows.last()) {
                    notes.push(format!(
                        "{tag}: max curve distance {:.3e} at N={} down to {:.3e} at N={}, outside-eps share {:.4} down to {:.4}",
                        first.max_distance,
                        first.windows,
                        last.max_distance,
                        last.windows,
                        first.outside_fraction,
                        last.outside_fraction,
                    ));
                }
                sets.push(ClusterSet { mode: m, nu, dt, rows });
            }
        }
    }

    if outside_region > 0 {
        return Err(ExperimentError::Numerical(format!(
            "{outside_region} eigenvalues outside the containment region, first: {first_outside}"
        )));
    }

    let parameters = json!({
        "interior_points": m_points,
        "nu_values": nu_values,
        "dt_values": dt_values,
        "window_counts": window_counts,
        "mode_indices": mode_indices,
        "eps": eps,
        "theta_samples": theta_samples,
        "region_tol": REGION_TOL,
    });
    write_manifest(
        out_dir,
        "clustering",
        cfg.seed.unwrap_or(0),
        parameters,
        &outputs,
        timings,
        notes,
    )?;
    Ok(ClusteringSummary { sets, outputs })
}
