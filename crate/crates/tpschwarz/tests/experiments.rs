//! Each packaged study run end to end on downsized parameters: expected
//! files appear, reruns are byte-identical, manifests carry the run
//! parameters, and the built-in cross-checks reject broken setups.

use std::collections::BTreeMap;
use std::path::Path;

use tpschwarz::config::ExperimentConfig;
use tpschwarz::experiments::{
    bounds, clustering, cn_order, heatcool, weak_scaling, ExperimentError,
};
use tpschwarz::pool::WorkerPool;

fn small(f: impl FnOnce(&mut ExperimentConfig)) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::default();
    f(&mut cfg);
    cfg
}

fn pool() -> WorkerPool {
    WorkerPool::new(2).expect("pool builds")
}

fn csv_bytes(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    for entry in std::fs::read_dir(dir).expect("dir readable") {
        let path = entry.expect("entry").path();
        let name = path.file_name().unwrap().to_string_lossy().into_owned();
        if name.ends_with(".csv") {
            out.insert(name, std::fs::read(&path).expect("file readable"));
        }
    }
    out
}

fn manifest(dir: &Path) -> serde_json::Value {
    let body = std::fs::read_to_string(dir.join("manifest.json")).expect("manifest exists");
    serde_json::from_str(&body).expect("manifest parses")
}

#[test]
fn bounds_study_writes_tables_and_is_reproducible() {
    let cfg = small(|c| {
        c.interior_points = Some(8);
        c.nu_values = Some(vec![0.1]);
        c.dt_values = Some(vec![0.25]);
        c.window_counts = Some(vec![2, 4]);
        c.mode_indices = Some(vec![1, 8]);
    });
    let dir = tempfile::tempdir().expect("tempdir");
    let first = dir.path().join("a");
    let summary = bounds::run(&cfg, &first).expect("study runs");
    assert_eq!(summary.rows.len(), 4, "two modes x two window counts");
    assert!(first.join("bounds_norms_m1_nu1e-1_dt2.5e-1.csv").exists());
    assert!(first.join("bounds_rho_tilde_vs_m_nu1e-1_dt2.5e-1.csv").exists());
    let m = manifest(&first);
    assert_eq!(m["experiment"], "bounds");
    assert_eq!(m["parameters"]["interior_points"], 8);
    assert!(m["timings_ms"].is_object());

    let second = dir.path().join("b");
    bounds::run(&cfg, &second).expect("rerun");
    assert_eq!(csv_bytes(&first), csv_bytes(&second), "reruns must be byte-identical");
}

#[test]
fn bounds_study_rejects_out_of_range_modes() {
    let cfg = small(|c| {
        c.interior_points = Some(8);
        c.mode_indices = Some(vec![9]);
    });
    let dir = tempfile::tempdir().expect("tempdir");
    match bounds::run(&cfg, dir.path()).err() {
        Some(ExperimentError::Invalid(_)) => {}
        other => panic!("expected a usage error, got {other:?}"),
    }
}

#[test]
fn clustering_study_reports_shrinking_distances() {
    let cfg = small(|c| {
        c.interior_points = Some(8);
        c.nu_values = Some(vec![1e-2]);
        c.dt_values = Some(vec![0.0078125]);
        c.window_counts = Some(vec![8, 16, 32]);
        c.mode_indices = Some(vec![1]);
        c.theta_samples = Some(401);
    });
    let dir = tempfile::tempdir().expect("tempdir");
    let summary = clustering::run(&cfg, dir.path()).expect("study runs");
    assert_eq!(summary.sets.len(), 1);
    let rows = &summary.sets[0].rows;
    assert_eq!(rows.len(), 3);
    assert!(
        rows[2].max_distance < rows[0].max_distance,
        "distances must shrink as windows multiply"
    );
    assert!(dir.path().join("clustering_summary_m1_nu1e-2_dt7.8125e-3.csv").exists());
    assert!(dir.path().join("clustering_spectrum_m1_nu1e-2_dt7.8125e-3_N16.csv").exists());
}

#[test]
fn cn_order_study_measures_second_order_slopes() {
    let cfg = small(|c| {
        c.mesh_exponents = Some(vec![3, 4, 5]);
    });
    let dir = tempfile::tempdir().expect("tempdir");
    let summary = cn_order::run(&cfg, dir.path()).expect("study runs");
    assert_eq!(summary.errors.len(), 3);
    assert!(summary.slope_y > 1.8 && summary.slope_y < 2.2);
    assert!(summary.slope_p > 1.8 && summary.slope_p < 2.2);
    assert!(dir.path().join("cn_order_errors.csv").exists());
    assert!(dir.path().join("cn_order_slopes.csv").exists());
}

#[test]
fn weak_scaling_study_keeps_iterations_flat_for_long_windows() {
    let cfg = small(|c| {
        c.interior_points = Some(7);
        c.dt_values = Some(vec![1.0, 0.5]);
        c.window_counts = Some(vec![2, 4]);
    });
    let dir = tempfile::tempdir().expect("tempdir");
    let summary = weak_scaling::run(&cfg, dir.path(), &pool()).expect("study runs");
    assert_eq!(summary.rows.len(), 4);
    let at = |dt: f64, n: usize| {
        summary
            .rows
            .iter()
            .find(|r| r.dt == dt && r.windows == n)
            .expect("row present")
    };
    // Long windows decouple: the count does not grow with the window count.
    assert_eq!(at(1.0, 2).iterations, at(1.0, 4).iterations);
    for r in &summary.rows {
        assert!(r.converged);
        assert!(r.final_rel_err_y.is_finite() && r.final_rel_err_y < 1e-6);
    }
    assert!(dir.path().join("weak_scaling_dt1e0.csv").exists());
    assert!(dir.path().join("weak_scaling_decay_dt5e-1_N4.csv").exists());
}

#[test]
fn weak_scaling_study_rejects_misaligned_window_lengths() {
    let cfg = small(|c| {
        c.interior_points = Some(7);
        c.dt_values = Some(vec![0.3]);
    });
    let dir = tempfile::tempdir().expect("tempdir");
    match weak_scaling::run(&cfg, dir.path(), &pool()).err() {
        Some(ExperimentError::Invalid(msg)) => {
            assert!(msg.contains("whole number of steps"), "got: {msg}")
        }
        other => panic!("expected a usage error, got {other:?}"),
    }
}

#[test]
fn heatcool_study_checks_periodicity_and_stays_window_count_independent() {
    let cfg = small(|c| {
        c.interior_points = Some(15);
        c.window_counts = Some(vec![2, 4, 8]);
    });
    let dir = tempfile::tempdir().expect("tempdir");
    let summary = heatcool::run(&cfg, dir.path(), &pool()).expect("study runs");
    assert_eq!(summary.rows.len(), 3);
    let counts: Vec<usize> = summary.rows.iter().map(|r| r.iterations).collect();
    let spread = counts.iter().max().unwrap() - counts.iter().min().unwrap();
    assert!(spread <= 1, "iteration counts {counts:?} should not grow with windows");
    for r in &summary.rows {
        assert_eq!(r.unknowns_per_window, summary.rows[0].unknowns_per_window);
    }
    // The N = 4 run also dumps the fields and passes the periodicity check.
    assert!(dir.path().join("heatcool_control_N4.csv").exists());
    assert!(dir.path().join("heatcool_state_N4.csv").exists());
    assert!(dir.path().join("heatcool_target_N4.csv").exists());
    assert!(dir.path().join("heatcool_summary.csv").exists());
    assert!(dir.path().join("heatcool_prediction.csv").exists());
    let m = manifest(dir.path());
    let notes = m["notes"].as_array().expect("notes array");
    assert!(
        notes.iter().any(|n| n.as_str().unwrap_or("").contains("control mismatch")),
        "periodicity note missing: {notes:?}"
    );
}
