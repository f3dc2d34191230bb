//! Acceptance gate for the whole workspace: eleven numbered checks, one
//! test each, covering the spectral model of the interface iteration, the
//! time discretization, and the window-parallel runs. Every test prints a
//! single `criterion NN ...: PASS/FAIL` line (shown with --nocapture) and
//! then asserts, so a red run still reports the status of each check.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use tpschwarz::config::ExperimentConfig;
use tpschwarz::experiments::{cn_order, heatcool, weak_scaling};
use tpschwarz::pool::WorkerPool;
use tpschwarz_core::model::{ProblemSpec, SpaceTimeField, SpatialGrid};
use tpschwarz_core::modes::{coefficients, eigenbasis, EigenBasis, ModeCoefficients};
use tpschwarz_core::pint::{schwarz_sweep, SchwarzSolver, SchwarzState, SerialMap};
use tpschwarz_core::theory::{
    eigenvalue_detail, infinity_norm_closed_form, rho_tilde, special_norm, spectral_radius,
    spectrum_report, symbol_eigenvalues, IterationMatrix,
};

/// Pinned tolerances. Each constant states why it is as large as it is;
/// loosening one is a visible diff, not a silent drift.
mod tol {
    /// The radius bound holds in exact arithmetic; the slack only covers
    /// QR eigensolve rounding on matrices up to dimension 1022.
    pub const EIG_SLACK: f64 = 1e-10;
    /// Identity between the squared scaled norm and its closed form,
    /// absolute; both sides are order one and assembled from the same
    /// coefficients, so only rounding separates them.
    pub const NORM_IDENTITY: f64 = 1e-12;
    /// Closed-form row sums against the dense matrix norm, absolute; the
    /// dense side adds at most four terms per row.
    pub const INF_NORM_MATCH: f64 = 1e-13;
    /// Region membership slack for computed eigenvalues.
    pub const REGION: f64 = 1e-10;
    /// Distance band around the symbol curve counted as clustered.
    pub const CLUSTER_EPS: f64 = 1e-2;
    /// Constant-modulus identity of the symbol branches, absolute.
    pub const MODULUS: f64 = 1e-13;
    /// One sweep against the dense interface map; the gap is the time
    /// discretization error and shrinks at second order, so at 64 steps
    /// of a 4e-5 window it is far below this.
    pub const SWEEP_MATCH: f64 = 1e-9;
    /// Iterates may beat the asymptotic decay early; they must not exceed
    /// it by more than measurement wobble (tight target) or pulse-driven
    /// re-excitation (looser desk target).
    pub const DECAY_SLACK: f64 = 1.05;
    pub const DESK_DECAY_SLACK: f64 = 1.2;
    /// Distance to the sequential solution after stopping on an interface
    /// increment of tol: the increment bounds the remaining error up to a
    /// modest constant.
    pub const EQUIVALENCE_FACTOR: f64 = 10.0;
}

fn unit_basis(points: usize) -> EigenBasis {
    eigenbasis(&SpatialGrid { domain_length: 1.0, interior_points: points })
}

fn report(number: u32, slug: &str, ok: bool, detail: &str) {
    println!(
        "criterion {number:02} {slug}: {} ({detail})",
        if ok { "PASS" } else { "FAIL" }
    );
}

#[test]
fn criterion_01_spectral_radius_sits_under_the_contraction_estimate() {
    let start = Instant::now();
    let basis = unit_basis(128);
    let window_counts = [2usize, 4, 8, 16, 32, 64, 128];
    let mut checked = 0usize;
    let mut violations: Vec<String> = Vec::new();
    for &nu in &[1e-1, 1e-2, 1e-4] {
        for &dt in &[1.0, 0.25, 0.0625, 0.0078125] {
            for m in 1..=128usize {
                let c = coefficients(basis.lambda(m - 1), nu, dt).unwrap();
                let rt = rho_tilde(&c);
                if !(rt < 1.0) {
                    violations.push(format!(
                        "rho~ = {rt} not below one at nu={nu:e} dt={dt} m={m}"
                    ));
                }
                let bound = rt.sqrt();
                for &n in &window_counts {
                    let t = IterationMatrix::assemble(c, n).unwrap();
                    let rho = spectral_radius(&t).unwrap();
                    checked += 1;
                    if rho > bound + tol::EIG_SLACK {
                        violations.push(format!(
                            "rho = {rho:.15} above bound {bound:.15} at nu={nu:e} dt={dt} m={m} N={n}"
                        ));
                    }
                }
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let in_budget = secs <= 120.0;
    let ok = violations.is_empty() && in_budget;
    report(
        1,
        "radius-under-estimate",
        ok,
        &format!("{checked} matrices, {} violations, {secs:.1}s", violations.len()),
    );
    assert!(violations.is_empty(), "first violation: {}", violations[0]);
    assert!(in_budget, "budget blown: {secs:.1}s > 120s");
}

#[test]
fn criterion_02_scaled_norm_squared_matches_its_closed_form() {
    let basis = unit_basis(128);
    let mut worst_coupled = 0.0f64;
    let mut worst_two = 0.0f64;
    for &nu in &[1e-1, 1e-2, 1e-4] {
        for &dt in &[1.0, 0.0078125] {
            for &m in &[1usize, 128] {
                let c = coefficients(basis.lambda(m - 1), nu, dt).unwrap();
                let rt = rho_tilde(&c);
                for n in 3..=64usize {
                    let sn = special_norm(&IterationMatrix::assemble(c, n).unwrap()).unwrap();
                    worst_coupled = worst_coupled.max((sn * sn - rt).abs());
                }
                // Two windows leave a single interface: the cross-coupling
                // term is absent and only the adjoint-to-state block remains.
                let sn = special_norm(&IterationMatrix::assemble(c, 2).unwrap()).unwrap();
                worst_two = worst_two.max((sn * sn - c.nu * c.c1 * c.c1).abs());
            }
        }
    }
    let ok = worst_coupled <= tol::NORM_IDENTITY && worst_two <= tol::NORM_IDENTITY;
    report(
        2,
        "scaled-norm-identity",
        ok,
        &format!("coupled gap {worst_coupled:.2e}, two-window gap {worst_two:.2e}"),
    );
    assert!(ok, "norm identity violated: {worst_coupled:.3e} / {worst_two:.3e}");
}

#[test]
fn criterion_03_row_sum_norm_closed_form_matches_dense_and_can_exceed_one() {
    let mut rng = ChaCha12Rng::seed_from_u64(193);
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let lambda = 10f64.powf(rng.gen_range(-1.0..5.0));
        let nu = 10f64.powf(rng.gen_range(-4.0..0.0));
        let dt = 10f64.powf(rng.gen_range(-2.5..0.5));
        let n: usize = rng.gen_range(3..=40);
        let c = coefficients(lambda, nu, dt).unwrap();
        let dense = IterationMatrix::assemble(c, n).unwrap().dense().infinity_norm();
        worst = worst.max((dense - infinity_norm_closed_form(&c)).abs());
    }
    // The row-sum norm is no contraction certificate: short windows at
    // small nu push it past one while the radius stays below one.
    let c = coefficients(unit_basis(128).lambda(0), 1e-2, 0.0078125).unwrap();
    let inf = infinity_norm_closed_form(&c);
    let crosses = inf > 1.0;
    let ok = worst <= tol::INF_NORM_MATCH && crosses;
    report(
        3,
        "row-sum-closed-form",
        ok,
        &format!("200 draws, worst gap {worst:.2e}, crossing value {inf:.4}"),
    );
    assert!(worst <= tol::INF_NORM_MATCH, "closed form off by {worst:.3e}");
    assert!(crosses, "expected the row-sum norm above one, got {inf}");
}

#[test]
fn criterion_04_every_eigenvalue_lands_in_the_predicted_region() {
    let basis = unit_basis(128);
    let mut checked = 0usize;
    let mut escaped: Vec<String> = Vec::new();
    for &nu in &[1e-2, 1e-4] {
        let c = coefficients(basis.lambda(0), nu, 0.0078125).unwrap();
        for &n in &[16usize, 32, 64, 128, 256, 512] {
            for row in eigenvalue_detail(&c, n, 2001, tol::REGION).unwrap() {
                checked += 1;
                if !row.in_region {
                    escaped.push(format!(
                        "{} + {}i escapes at nu={nu:e} N={n}",
                        row.re, row.im
                    ));
                }
            }
        }
    }
    let ok = escaped.is_empty();
    report(
        4,
        "region-containment",
        ok,
        &format!("{checked} eigenvalues, {} outside", escaped.len()),
    );
    assert!(ok, "first escape: {}", escaped[0]);
}

#[test]
fn criterion_05_spectra_cluster_onto_the_symbol_curve() {
    let basis = unit_basis(128);
    let counts = [16usize, 32, 64, 128, 256, 512];
    let mut failures: Vec<String> = Vec::new();
    let mut details = Vec::new();
    for &nu in &[1e-2, 1e-4] {
        let c = coefficients(basis.lambda(0), nu, 0.0078125).unwrap();
        let rows = spectrum_report(&c, &counts, tol::CLUSTER_EPS, 2001).unwrap();
        // The share of the spectrum outside the band thins out under
        // window refinement and is empty at the last rung; the worst
        // curve distance shrinks outright.
        let shares: Vec<f64> = rows.iter().map(|r| r.outside_fraction).collect();
        if !shares.windows(2).all(|w| w[1] <= w[0] + 1e-15) {
            failures.push(format!("outside share grew at nu={nu:e}: {shares:?}"));
        }
        if *shares.last().unwrap() != 0.0 {
            failures.push(format!("band still has outliers at N=512 for nu={nu:e}: {shares:?}"));
        }
        if rows.last().unwrap().max_distance >= rows[0].max_distance {
            failures.push(format!("max distance did not shrink at nu={nu:e}"));
        }
        details.push(format!(
            "nu={nu:e}: shares {:?}, max dist {:.2e} -> {:.2e}",
            shares,
            rows[0].max_distance,
            rows.last().unwrap().max_distance
        ));
    }
    report(5, "spectral-clustering", failures.is_empty(), &details.join("; "));
    assert!(failures.is_empty(), "{}", failures.join("; "));
}

#[test]
fn criterion_06_symbol_branches_keep_constant_modulus() {
    let basis = unit_basis(128);
    let sets: [(f64, f64, usize); 3] =
        [(1e-2, 0.0078125, 1), (1e-4, 0.0078125, 1), (1e-1, 0.25, 32)];
    let mut worst = 0.0f64;
    for (nu, dt, m) in sets {
        let c: ModeCoefficients = coefficients(basis.lambda(m - 1), nu, dt).unwrap();
        let expect = c.c2 * c.c2 + c.nu * c.c1 * c.c1;
        for k in 0..2001 {
            let theta = 2.0 * std::f64::consts::PI * k as f64 / 2000.0;
            let (plus, minus) = symbol_eigenvalues(&c, theta);
            worst = worst
                .max((plus.norm_sqr() - expect).abs())
                .max((minus.norm_sqr() - expect).abs());
        }
    }
    let ok = worst <= tol::MODULUS;
    report(6, "constant-modulus-symbol", ok, &format!("worst gap {worst:.2e} over 2001 angles"));
    assert!(ok, "modulus varies by {worst:.3e}");
}

#[test]
fn criterion_07_time_discretization_converges_at_second_order() {
    let start = Instant::now();
    let dir = tempfile::tempdir().expect("tempdir");
    let summary = cn_order::run(&ExperimentConfig::default(), dir.path()).expect("study runs");
    let secs = start.elapsed().as_secs_f64();
    let in_range = |s: f64| (1.8..=2.2).contains(&s);
    let in_budget = secs <= 60.0;
    let ok = in_range(summary.slope_y) && in_range(summary.slope_p) && in_budget;
    report(
        7,
        "second-order-discretization",
        ok,
        &format!(
            "state slope {:.3}, adjoint slope {:.3}, {secs:.1}s",
            summary.slope_y, summary.slope_p
        ),
    );
    assert!(in_range(summary.slope_y), "state slope {} off", summary.slope_y);
    assert!(in_range(summary.slope_p), "adjoint slope {} off", summary.slope_p);
    assert!(in_budget, "budget blown: {secs:.1}s > 60s");
}

#[test]
fn criterion_08_one_sweep_acts_as_the_interface_matrix() {
    let windows = 8usize;
    let interior = 8usize;
    let dt = 4e-5;
    let mismatch = |steps: usize| -> f64 {
        let spec = ProblemSpec {
            domain_length: 1.0,
            horizon: dt * windows as f64,
            nu: 0.1,
            windows,
            steps_per_window: steps,
            interior_points: interior,
        };
        // Zero data makes the traces pure errors, so one sweep must act on
        // their mode coefficients as the assembled interface matrix, up to
        // the time discretization gap.
        let target = SpaceTimeField::zeros(spec.time().levels(), interior);
        let y0 = vec![0.0; interior];
        let solver = SchwarzSolver::new(spec, &target, &y0).unwrap();
        let mut state = SchwarzState::initial(&solver);
        let mut rng = ChaCha12Rng::seed_from_u64(17);
        for i in 1..windows {
            let mut y = vec![0.0; interior];
            let mut p = vec![0.0; interior];
            for j in 0..interior {
                y[j] = rng.gen_range(-1.0..1.0);
                p[j] = rng.gen_range(-1.0..1.0);
            }
            state.set_y_trace(i, &y);
            state.set_p_trace(i, &p);
        }
        let basis = solver.basis();
        let dim = 2 * (windows - 1);
        let mut before = vec![vec![0.0; dim]; interior];
        let mut after = vec![vec![0.0; dim]; interior];
        let fill = |dst: &mut Vec<Vec<f64>>, state: &SchwarzState| {
            for i in 1..windows {
                let ym = basis.forward(state.y_trace(i));
                let pm = basis.forward(state.p_trace(i));
                for mode in 0..interior {
                    dst[mode][2 * (i - 1)] = pm[mode] / spec.nu;
                    dst[mode][2 * (i - 1) + 1] = ym[mode];
                }
            }
        };
        fill(&mut before, &state);
        schwarz_sweep(&solver, &mut state, &SerialMap);
        fill(&mut after, &state);
        let mut worst = 0.0f64;
        for mode in 0..interior {
            let c = coefficients(basis.lambda(mode), spec.nu, spec.window_length()).unwrap();
            let t = IterationMatrix::assemble(c, windows).unwrap();
            let predicted = t.apply(&before[mode]);
            for (got, want) in after[mode].iter().zip(&predicted) {
                worst = worst.max((got - want).abs());
            }
        }
        worst
    };
    let coarse = mismatch(64);
    let fine = mismatch(128);
    let ratio = coarse / fine;
    let ok = coarse <= tol::SWEEP_MATCH && (2.5..6.5).contains(&ratio);
    report(
        8,
        "sweep-equals-matrix",
        ok,
        &format!("mismatch {coarse:.2e} at 64 steps, refinement ratio {ratio:.2}"),
    );
    assert!(coarse <= tol::SWEEP_MATCH, "one-sweep mismatch {coarse:.3e}");
    assert!((2.5..6.5).contains(&ratio), "not second order: ratio {ratio:.2}");
}

#[test]
fn criterion_09_iteration_count_is_flat_in_the_window_count() {
    let start = Instant::now();
    let dir = tempfile::tempdir().expect("tempdir");
    let pool = WorkerPool::new(2).expect("pool builds");
    let summary =
        weak_scaling::run(&ExperimentConfig::default(), dir.path(), &pool).expect("study runs");
    let secs = start.elapsed().as_secs_f64();

    // Long windows decouple the interfaces: the sweep count to a fixed
    // tolerance must not depend on how many windows run in parallel.
    let long: Vec<usize> =
        summary.rows.iter().filter(|r| r.dt == 1.0).map(|r| r.iterations).collect();
    let spread = long.iter().max().unwrap() - long.iter().min().unwrap();

    // Short windows couple them: the radius grows with the window count
    // and has more than doubled by sixteen windows.
    let rho_at = |n: usize| {
        summary
            .rows
            .iter()
            .find(|r| r.dt == 0.0625 && r.windows == n)
            .expect("row present")
            .rho
    };
    let growth = rho_at(16) / rho_at(2);

    let decays_hold = summary.rows.iter().all(|r| {
        r.converged
            && r.observed_decay.map_or(true, |d| d <= r.predicted_decay * tol::DECAY_SLACK)
    });
    let in_budget = secs <= 300.0;
    let ok = spread <= 1 && growth > 2.0 && decays_hold && in_budget;
    report(
        9,
        "weak-scalability",
        ok,
        &format!(
            "long-window sweep counts {long:?}, short-window radius growth {growth:.2}x, {secs:.1}s"
        ),
    );
    assert!(spread <= 1, "sweep counts vary with the window count: {long:?}");
    assert!(growth > 2.0, "radius growth only {growth:.3}x");
    assert!(decays_hold, "a run decayed slower than predicted");
    assert!(in_budget, "budget blown: {secs:.1}s > 300s");
}

#[test]
fn criterion_10_pulse_train_desk_stays_window_count_independent() {
    let dir = tempfile::tempdir().expect("tempdir");
    let pool = WorkerPool::new(2).expect("pool builds");
    let summary =
        heatcool::run(&ExperimentConfig::default(), dir.path(), &pool).expect("study runs");
    let counts: Vec<usize> = summary.rows.iter().map(|r| r.iterations).collect();
    let spread = counts.iter().max().unwrap() - counts.iter().min().unwrap();
    let decays_hold = summary.rows.iter().all(|r| {
        r.converged
            && r.observed_decay.map_or(true, |d| d <= r.predicted_decay * tol::DESK_DECAY_SLACK)
    });
    let ok = spread <= 1 && decays_hold;
    let worst_ratio = summary
        .rows
        .iter()
        .filter_map(|r| r.observed_decay.map(|d| d / r.predicted_decay))
        .fold(0.0f64, f64::max);
    report(
        10,
        "pulse-train-desk",
        ok,
        &format!("sweep counts {counts:?}, worst decay ratio {worst_ratio:.3}"),
    );
    assert!(spread <= 1, "sweep counts vary with the window count: {counts:?}");
    assert!(decays_hold, "a run decayed slower than {} x prediction", tol::DESK_DECAY_SLACK);
}

/// Full-length horizon: 512 windows, 8.3 million unknowns. Kept out of
/// the default run for its size, not its outcome; run on demand with
/// `cargo test -p tpschwarz --test acceptance -- --ignored`.
#[test]
#[ignore = "full-length horizon, large allocation and tens of seconds"]
fn criterion_10_full_horizon_reaches_eight_million_unknowns() {
    let cfg = ExperimentConfig { window_counts: Some(vec![512]), ..Default::default() };
    let dir = tempfile::tempdir().expect("tempdir");
    let pool = WorkerPool::new(2).expect("pool builds");
    let summary = heatcool::run(&cfg, dir.path(), &pool).expect("study runs");
    let row = &summary.rows[0];
    let ok = row.unknowns_total == 8_323_326 && row.converged;
    report(
        10,
        "full-horizon",
        ok,
        &format!("{} unknowns, {} sweeps", row.unknowns_total, row.iterations),
    );
    assert_eq!(row.unknowns_total, 8_323_326);
    assert!(row.converged);
}

#[test]
fn criterion_11_iterates_land_on_the_sequential_solution() {
    // Both solver-backed studies compare every iterate against the
    // one-shot space-time solve; after stopping, the relative distance in
    // the space-time norm must sit within a small factor of the interface
    // tolerance, for the state and the adjoint separately.
    let dir = tempfile::tempdir().expect("tempdir");
    let pool = WorkerPool::new(2).expect("pool builds");
    let ws = weak_scaling::run(&ExperimentConfig::default(), &dir.path().join("ws"), &pool)
        .expect("study runs");
    let hc = heatcool::run(&ExperimentConfig::default(), &dir.path().join("hc"), &pool)
        .expect("study runs");
    let mut worst = 0.0f64;
    let mut checked = 0usize;
    let mut failures: Vec<String> = Vec::new();
    {
        let mut check = |rel_y: f64, rel_p: f64, tol_run: f64, label: String| {
            let cap = tol::EQUIVALENCE_FACTOR * tol_run;
            worst = worst.max(rel_y / tol_run).max(rel_p / tol_run);
            checked += 1;
            if !(rel_y <= cap && rel_p <= cap) {
                failures.push(format!(
                    "{label}: relative errors {rel_y:.2e}/{rel_p:.2e} exceed {cap:.1e}"
                ));
            }
        };
        for r in &ws.rows {
            check(
                r.final_rel_err_y,
                r.final_rel_err_p,
                r.tol,
                format!("dt={} N={}", r.dt, r.windows),
            );
        }
        for r in &hc.rows {
            check(r.final_rel_err_y, r.final_rel_err_p, r.tol, format!("desk N={}", r.windows));
        }
    }
    report(
        11,
        "sequential-equivalence",
        failures.is_empty(),
        &format!("{checked} runs, worst error at {worst:.2}x the stopping tolerance"),
    );
    assert!(failures.is_empty(), "{}", failures.join("; "));
}
