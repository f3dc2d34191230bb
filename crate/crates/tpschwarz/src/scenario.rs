//! Builds the driving data (target trajectory, initial state) named by a
//! [`Scenario`] on a concrete problem grid.

use tpschwarz_core::model::{HeatcoolTarget, ManufacturedSolution, ProblemSpec, SpaceTimeField};

use crate::config::Scenario;

/// Target trajectory of a scenario, sampled on the problem's space-time grid.
pub fn target_field(scenario: Scenario, spec: &ProblemSpec) -> SpaceTimeField {
    let grid = spec.grid();
    let time = spec.time();
    match scenario {
        Scenario::Manufactured => {
            let exact = ManufacturedSolution::new(spec.nu, spec.horizon);
            SpaceTimeField::from_fn(&grid, &time, |x, t| exact.target(x, t))
        }
        Scenario::Heatcool => {
            let target =
                HeatcoolTarget::new(spec.domain_length, spec.window_length(), spec.windows);
            SpaceTimeField::from_fn(&grid, &time, |x, t| target.eval(x, t))
        }
        Scenario::Zero => SpaceTimeField::zeros(time.levels(), grid.interior_points),
    }
}

/// Initial state of a scenario. Every scenario starts from rest: the
/// manufactured state vanishes identically at t = 0 by construction, and
/// the other two are defined that way.
pub fn initial_state(_scenario: Scenario, spec: &ProblemSpec) -> Vec<f64> {
    vec![0.0; spec.interior_points]
}
