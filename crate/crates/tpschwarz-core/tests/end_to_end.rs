//! Exercises the crate through its public interface only: a tracking
//! problem with a known closed-form optimum, solved monolithically and by
//! window sweeps, with the interface iteration checked against its
//! spectral model along the way.

use tpschwarz_core::model::{l2q_norm, ManufacturedSolution, ProblemSpec, SpaceTimeField};
use tpschwarz_core::modes::{coefficients, eigenbasis};
use tpschwarz_core::pint::{
    assemble_fields, l2q_errors_vs_reference, monolithic_solve, schwarz_solve, SchwarzSolver,
    SchwarzState, SerialMap, SolveOptions,
};
use tpschwarz_core::theory::{
    eigenvalue_detail, rho_tilde, spectral_radius, IterationMatrix,
};

fn spec() -> ProblemSpec {
    ProblemSpec {
        domain_length: 1.0,
        horizon: 1.0,
        nu: 0.1,
        windows: 4,
        steps_per_window: 16,
        interior_points: 63,
    }
}

#[test]
fn windowed_solution_reproduces_the_known_optimum() {
    let spec = spec();
    let exact = ManufacturedSolution::new(spec.nu, spec.horizon);
    let grid = spec.grid();
    let time = spec.time();
    let target = SpaceTimeField::from_fn(&grid, &time, |x, t| exact.target(x, t));
    let y0 = vec![0.0; spec.interior_points];

    let solver = SchwarzSolver::new(spec, &target, &y0).expect("valid spec");
    let mono = monolithic_solve(spec, &target, &y0).expect("reference solve");
    let mut state = SchwarzState::initial(&solver);
    let report = schwarz_solve(
        &solver,
        &mut state,
        SolveOptions { tol: 1e-11, max_iters: 60 },
        Some(&mono),
        &SerialMap,
    )
    .expect("iteration runs");
    assert!(report.converged, "stalled after {} sweeps", report.iterations);

    // Against the sequential reference the iterate is tight: stopping at
    // an interface increment of 1e-11 leaves errors a couple of orders
    // above it at worst.
    let (err_y, err_p) = l2q_errors_vs_reference(&solver, &state, &mono).expect("same shapes");
    assert!(err_y < 1e-9 && err_p < 1e-9, "iterate off reference: {err_y:.2e}, {err_p:.2e}");

    // Against the continuum optimum only the discretization error remains,
    // second order in the mesh width 1/64.
    let fields = assemble_fields(&solver, &state);
    let diff = |computed: &SpaceTimeField, exact_val: &dyn Fn(f64, f64) -> f64| {
        let mut e = SpaceTimeField::from_fn(&grid, &time, exact_val);
        for l in 0..e.levels() {
            for j in 0..e.nodes() {
                let v = e.at(l, j) - computed.at(l, j);
                e.set(l, j, v);
            }
        }
        l2q_norm(&e, &grid, &time)
    };
    let dy = diff(&fields.y, &|x, t| exact.state(x, t));
    let dp = diff(&fields.p, &|x, t| exact.adjoint(x, t));
    let du = diff(&fields.u, &|x, t| exact.control(x, t));
    assert!(dy < 5e-4, "state misses the optimum by {dy:.2e}");
    assert!(dp < 5e-4, "adjoint misses the optimum by {dp:.2e}");
    assert!(du < 5e-3, "control misses the optimum by {du:.2e}");
    // The control is the scaled adjoint everywhere, including after assembly.
    assert!((du - dp / spec.nu).abs() <= 1e-12 * du.max(1.0));
}

#[test]
fn observed_interface_contraction_obeys_the_spectral_model() {
    let spec = spec();
    let exact = ManufacturedSolution::new(spec.nu, spec.horizon);
    let grid = spec.grid();
    let time = spec.time();
    let target = SpaceTimeField::from_fn(&grid, &time, |x, t| exact.target(x, t));
    let y0 = vec![0.0; spec.interior_points];

    let solver = SchwarzSolver::new(spec, &target, &y0).expect("valid spec");
    let mono = monolithic_solve(spec, &target, &y0).expect("reference solve");
    let mut state = SchwarzState::initial(&solver);
    let report = schwarz_solve(
        &solver,
        &mut state,
        SolveOptions { tol: 1e-10, max_iters: 60 },
        Some(&mono),
        &SerialMap,
    )
    .expect("iteration runs");
    assert!(report.converged);

    // The slowest interface mode dominates the asymptotic decay; measure
    // the error ratio over the last sweeps and compare with sqrt(rho~) of
    // the lowest spatial mode. An even step count averages out the
    // two-cycle that conjugate eigenvalue pairs induce.
    let errs: Vec<f64> = report.history.iter().filter_map(|r| r.err_y).collect();
    let n = errs.len();
    assert!(n >= 6, "history too short: {n}");
    let span = 4;
    let observed = (errs[n - 1] / errs[n - 1 - span]).powf(1.0 / span as f64);
    let c = coefficients(
        eigenbasis(&grid).lambda(0),
        spec.nu,
        spec.window_length(),
    )
    .expect("valid coefficients");
    let bound = rho_tilde(&c).sqrt();
    assert!(
        observed <= bound * 1.05,
        "observed decay {observed:.4} above the bound {bound:.4}"
    );

    // The same matrix the sweep realizes has its spectrum on the predicted
    // curve: radius below the bound, every eigenvalue in the region.
    let m = IterationMatrix::assemble(c, spec.windows).expect("window count fits");
    let rho = spectral_radius(&m).expect("converged eigensolve");
    assert!(rho <= bound + 1e-12);
    for row in eigenvalue_detail(&c, spec.windows, 801, 1e-10).expect("detail rows") {
        assert!(row.in_region, "eigenvalue {} + {}i escapes the region", row.re, row.im);
    }
}
