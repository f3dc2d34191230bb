//! Weak-scaling study: fixed window length and mesh while the window count
//! grows, measuring iteration counts and the per-iteration error decay
//! against the contraction predicted for the lowest spatial mode.

use std::path::Path;

use serde_json::json;
use tpschwarz_core::modes::coefficients;
use tpschwarz_core::pint::{
    monolithic_solve, schwarz_solve, SchwarzSolver, SchwarzState, SolveOptions,
};
use tpschwarz_core::theory::{
    infinity_norm_closed_form, rho_tilde, spectral_radius, IterationMatrix,
};

use super::{ensure_dir, geometric_decay, write_manifest, write_table, ExperimentError, Timings};
use crate::config::{ExperimentConfig, Scenario};
use crate::csvout::{fmt_param, Table};
use crate::pool::WorkerPool;
use crate::scenario::{initial_state, target_field};

/// Measured asymptotic decay may graze the theoretical rate from below;
/// the slack absorbs finite-run wobble, not a weaker bound.
const DECAY_SLACK: f64 = 1.05;

#[derive(Clone, Copy, Debug)]
pub struct WeakScalingRow {
    pub dt: f64,
    pub windows: usize,
    pub iterations: usize,
    pub converged: bool,
    pub observed_decay: Option<f64>,
    pub predicted_decay: f64,
    pub rho: f64,
    pub inf_norm: f64,
    pub rho_tilde: f64,
    pub final_rel_err_y: f64,
    pub final_rel_err_p: f64,
    pub tol: f64,
}

pub struct WeakScalingSummary {
    pub rows: Vec<WeakScalingRow>,
    pub outputs: Vec<String>,
}

pub fn run(
    cfg: &ExperimentConfig,
    out_dir: &Path,
    pool: &WorkerPool,
) -> Result<WeakScalingSummary, ExperimentError> {
    let m_points = cfg.interior_points.unwrap_or(31);
    let nu = cfg.nu_values.as_ref().and_then(|v| v.first().copied()).unwrap_or(0.1);
    let dt_values = cfg.dt_values.clone().unwrap_or_else(|| vec![1.0, 0.25, 0.125, 0.0625]);
    let window_counts = cfg.window_counts.clone().unwrap_or_else(|| vec![2, 4, 8, 16]);
    let tol = cfg.tol.unwrap_or(1e-8);
    let max_iters = cfg.max_iters.unwrap_or(100);
    if m_points == 0 || !(nu > 0.0) || !(tol > 0.0) || max_iters == 0 {
        return Err(ExperimentError::Invalid(
            "need positive interior_points, nu, tol and max_iters".into(),
        ));
    }
    if window_counts.iter().any(|&n| n < 2) {
        return Err(ExperimentError::Invalid("window counts must be at least 2".into()));
    }

    ensure_dir(out_dir)?;
    let mut timings = Timings::new();
    let mut outputs = Vec::new();
    let mut rows = Vec::new();
    let mut notes = Vec::new();

    for &dt in &dt_values {
        let steps = steps_for(dt, m_points)?;
        let mut table = Table::new(
            "N,iterations,converged,observed_decay,predicted_decay,rho,inf_norm,rho_tilde,sqrt_rho_tilde",
        );
        for &n in &window_counts {
            let spec = tpschwarz_core::model::ProblemSpec {
                domain_length: 1.0,
                horizon: dt * n as f64,
                nu,
                windows: n,
                steps_per_window: steps,
                interior_points: m_points,
            };
            let tag = format!("dt{}_N{n}", fmt_param(dt));
            let row = timings.time(&format!("solve_{tag}"), || {
                run_point(spec, dt, tol, max_iters, pool)
            })?;
            outputs.push(write_table(
                out_dir,
                format!("weak_scaling_decay_{tag}.csv"),
                &row.1,
            )?);
            let r = row.0;
            table.row(&[
                n.into(),
                r.iterations.into(),
                r.converged.into(),
                r.observed_decay.into(),
                r.predicted_decay.into(),
                r.rho.into(),
                r.inf_norm.into(),
                r.rho_tilde.into(),
                r.rho_tilde.sqrt().into(),
            ]);
            if !r.converged {
                return Err(ExperimentError::Numerical(format!(
                    "no convergence to {tol:e} within {max_iters} sweeps at {tag}"
                )));
            }
            if let Some(observed) = r.observed_decay {
                if observed > r.predicted_decay * DECAY_SLACK {
                    return Err(ExperimentError::Numerical(format!(
                        "observed decay {observed:.4} above the predicted rate {:.4} at {tag}",
                        r.predicted_decay
                    )));
                }
                notes.push(format!(
                    "{tag}: observed decay {observed:.4}, predicted {:.4}, ratio {:.3}",
                    r.predicted_decay,
                    observed / r.predicted_decay
                ));
            } else {
                notes.push(format!("{tag}: history too short to estimate a decay rate"));
            }
            rows.push(r);
        }
        outputs.push(write_table(
            out_dir,
            format!("weak_scaling_dt{}.csv", fmt_param(dt)),
            &table,
        )?);
    }

    let parameters = json!({
        "interior_points": m_points,
        "nu": nu,
        "dt_values": dt_values,
        "window_counts": window_counts,
        "tol": tol,
        "max_iters": max_iters,
        "scenario": "manufactured",
    });
    write_manifest(
        out_dir,
        "weak-scaling",
        cfg.seed.unwrap_or(0),
        parameters,
        &outputs,
        timings,
        notes,
    )?;
    Ok(WeakScalingSummary { rows, outputs })
}

/// The study couples the time step to the mesh (h_t = h_x), so the window
/// length must be a whole number of steps.
fn steps_for(dt: f64, m_points: usize) -> Result<usize, ExperimentError> {
    let raw = dt * (m_points + 1) as f64;
    let steps = raw.round();
    if !(steps >= 1.0) || (steps - raw).abs() > 1e-9 {
        return Err(ExperimentError::Invalid(format!(
            "window length {dt} is not a whole number of steps at h = 1/{}",
            m_points + 1
        )));
    }
    Ok(steps as usize)
}

fn run_point(
    spec: tpschwarz_core::model::ProblemSpec,
    dt: f64,
    tol: f64,
    max_iters: usize,
    pool: &WorkerPool,
) -> Result<(WeakScalingRow, Table), ExperimentError> {
    let target = target_field(Scenario::Manufactured, &spec);
    let y0 = initial_state(Scenario::Manufactured, &spec);
    let solver = SchwarzSolver::new(spec, &target, &y0).map_err(ExperimentError::numerical)?;
    let mono = monolithic_solve(spec, &target, &y0).map_err(ExperimentError::numerical)?;
    let mut state = SchwarzState::initial(&solver);
    let report = schwarz_solve(
        &solver,
        &mut state,
        SolveOptions { tol, max_iters },
        Some(&mono),
        pool,
    )
    .map_err(ExperimentError::numerical)?;

    let mut decay = Table::new("iter,interface_incr,err_y,err_p");
    for rec in &report.history {
        decay.row(&[
            rec.iteration.into(),
            rec.interface_increment.into(),
            rec.err_y.into(),
            rec.err_p.into(),
        ]);
    }

    let lambda1 = solver.basis().lambda(0);
    let c = coefficients(lambda1, spec.nu, dt).map_err(ExperimentError::numerical)?;
    let rt = rho_tilde(&c);
    let matrix = IterationMatrix::assemble(c, spec.windows).map_err(ExperimentError::numerical)?;
    let rho = spectral_radius(&matrix).map_err(ExperimentError::numerical)?;

    let err_y_history: Vec<f64> = report.history.iter().filter_map(|r| r.err_y).collect();
    let (ny, np) = mono.l2q_norms();
    let last = report.history.last().expect("at least one sweep ran");
    let rel = |err: Option<f64>, norm: f64| err.map(|e| e / norm.max(f64::MIN_POSITIVE));

    let row = WeakScalingRow {
        dt,
        windows: spec.windows,
        iterations: report.iterations,
        converged: report.converged,
        observed_decay: geometric_decay(&err_y_history),
        predicted_decay: rt.sqrt(),
        rho,
        inf_norm: infinity_norm_closed_form(&c),
        rho_tilde: rt,
        final_rel_err_y: rel(last.err_y, ny).unwrap_or(f64::NAN),
        final_rel_err_p: rel(last.err_p, np).unwrap_or(f64::NAN),
        tol,
    };
    Ok((row, decay))
}
