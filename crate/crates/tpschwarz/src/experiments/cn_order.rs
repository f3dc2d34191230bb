//! Time-stepping refinement study on the manufactured problem: solves the
//! full-horizon system on meshes h = 2^-e with h_t = h_x = h and fits the
//! observed convergence order of state and adjoint.

use std::path::Path;

use serde_json::json;
use tpschwarz_core::model::{l2q_norm, ManufacturedSolution, ProblemSpec, SpaceTimeField};
use tpschwarz_core::pint::monolithic_solve;

use super::{ensure_dir, ls_slope, write_manifest, write_table, ExperimentError, Timings};
use crate::config::ExperimentConfig;
use crate::csvout::Table;

/// Acceptable fitted-order window around the scheme's nominal order 2.
const SLOPE_RANGE: (f64, f64) = (1.8, 2.2);

pub struct CnOrderSummary {
    /// (h, err_y, err_p) per mesh.
    pub errors: Vec<(f64, f64, f64)>,
    pub slope_y: f64,
    pub slope_p: f64,
    pub outputs: Vec<String>,
}

pub fn run(cfg: &ExperimentConfig, out_dir: &Path) -> Result<CnOrderSummary, ExperimentError> {
    let nu = cfg.nu_values.as_ref().and_then(|v| v.first().copied()).unwrap_or(0.1);
    let exponents = cfg.mesh_exponents.clone().unwrap_or_else(|| vec![3, 4, 5, 6, 7]);
    if exponents.len() < 2 {
        return Err(ExperimentError::Invalid("need at least two mesh exponents".into()));
    }
    if exponents.iter().any(|&e| e == 0 || e > 16) {
        return Err(ExperimentError::Invalid("mesh exponents must lie in 1..=16".into()));
    }
    if !(nu > 0.0) {
        return Err(ExperimentError::Invalid("nu must be positive".into()));
    }

    ensure_dir(out_dir)?;
    let mut timings = Timings::new();
    let mut errors = Vec::new();
    for &e in &exponents {
        let steps = 1usize << e;
        let spec = ProblemSpec {
            domain_length: 1.0,
            horizon: 1.0,
            nu,
            windows: 1,
            steps_per_window: steps,
            interior_points: steps - 1,
        };
        let exact = ManufacturedSolution::new(nu, spec.horizon);
        let grid = spec.grid();
        let time = spec.time();
        let (err_y, err_p) = timings.time(&format!("mesh_2e-{e}"), || {
            let target = SpaceTimeField::from_fn(&grid, &time, |x, t| exact.target(x, t));
            let y0 = vec![0.0; spec.interior_points];
            let mono = monolithic_solve(spec, &target, &y0).map_err(ExperimentError::numerical)?;
            let fields = mono.fields();
            let mut dy = SpaceTimeField::from_fn(&grid, &time, |x, t| exact.state(x, t));
            let mut dp = SpaceTimeField::from_fn(&grid, &time, |x, t| exact.adjoint(x, t));
            for (d, v) in dy.as_mut_slice().iter_mut().zip(fields.y.as_slice()) {
                *d -= v;
            }
            for (d, v) in dp.as_mut_slice().iter_mut().zip(fields.p.as_slice()) {
                *d -= v;
            }
            Ok::<_, ExperimentError>((l2q_norm(&dy, &grid, &time), l2q_norm(&dp, &grid, &time)))
        })?;
        errors.push((1.0 / steps as f64, err_y, err_p));
    }

    let log_h: Vec<f64> = errors.iter().map(|r| r.0.ln()).collect();
    let slope_y = ls_slope(&log_h, &errors.iter().map(|r| r.1.ln()).collect::<Vec<_>>());
    let slope_p = ls_slope(&log_h, &errors.iter().map(|r| r.2.ln()).collect::<Vec<_>>());

    let mut err_table = Table::new("h,err_y,err_p");
    for &(h, ey, ep) in &errors {
        err_table.row(&[h.into(), ey.into(), ep.into()]);
    }
    let mut slope_table = Table::new("field,slope");
    slope_table.row(&["y".into(), slope_y.into()]);
    slope_table.row(&["p".into(), slope_p.into()]);
    let outputs = vec![
        write_table(out_dir, "cn_order_errors.csv".into(), &err_table)?,
        write_table(out_dir, "cn_order_slopes.csv".into(), &slope_table)?,
    ];

    for (field, slope) in [("state", slope_y), ("adjoint", slope_p)] {
        if !(SLOPE_RANGE.0..=SLOPE_RANGE.1).contains(&slope) {
            return Err(ExperimentError::Numerical(format!(
                "{field} refinement order {slope:.3} outside [{}, {}]",
                SLOPE_RANGE.0, SLOPE_RANGE.1
            )));
        }
    }

    let parameters = json!({
        "nu": nu,
        "mesh_exponents": exponents,
        "slope_range": [SLOPE_RANGE.0, SLOPE_RANGE.1],
    });
    let notes = vec![format!("fitted orders: state {slope_y:.4}, adjoint {slope_p:.4}")];
    write_manifest(
        out_dir,
        "cn-order",
        cfg.seed.unwrap_or(0),
        parameters,
        &outputs,
        timings,
        notes,
    )?;
    Ok(CnOrderSummary { errors, slope_y, slope_p, outputs })
}
