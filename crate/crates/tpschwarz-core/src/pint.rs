//! Windowed (parallel-in-time) Schwarz solver for the reduced optimality
//! system, plus the all-at-once monolithic solver used as its reference.
//!
//! The time horizon is split into nonoverlapping windows. Each sweep
//! solves every window's coupled state/adjoint boundary-value problem
//! independently against the previous sweep's interface data (state trace
//! from the left neighbor, adjoint trace from the right neighbor), then
//! refreshes the interface buffers. Interface data crossing the module
//! boundary are nodal spatial vectors; internally every window solve is a
//! set of independent per-mode tridiagonal-block systems discretized by
//! the trapezoidal rule in time, one banded factorization per mode shared
//! by all windows and all sweeps.

use alloc::vec;
use alloc::vec::Vec;

use crate::fmath;
use crate::linalg::{Banded, BandedError, BandedLu};
use crate::model::{ModelError, ProblemSpec, SpaceTimeField};
use crate::modes::{eigenbasis, EigenBasis, ModesError};

/// Executor abstraction for the per-window solves of one sweep.
///
/// `map` must return exactly `count` results with `out[i] = f(i)`; the
/// order in which the closures run is unobservable because a sweep reads
/// only frozen previous-iteration data. Results must not depend on the
/// executor, so reductions over the output happen on the caller's side in
/// index order.
pub trait ParallelMap {
    fn map<T: Send>(&self, count: usize, f: impl Fn(usize) -> T + Sync) -> Vec<T>;
}

/// Runs the window solves one after another on the calling thread.
#[derive(Clone, Copy, Debug, Default)]
pub struct SerialMap;

impl ParallelMap for SerialMap {
    fn map<T: Send>(&self, count: usize, f: impl Fn(usize) -> T + Sync) -> Vec<T> {
        (0..count).map(f).collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum PintError {
    Model(ModelError),
    Modes(ModesError),
    /// A per-mode factorization failed; signals invalid parameters. All
    /// factorizations happen up front, so sweeps themselves cannot fail.
    Factorization { mode: usize, source: BandedError },
    Shape { what: &'static str, expected: usize, got: usize },
    InvalidOption { name: &'static str, reason: &'static str },
}

impl core::fmt::Display for PintError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            PintError::Model(e) => write!(f, "{e}"),
            PintError::Modes(e) => write!(f, "{e}"),
            PintError::Factorization { mode, source } => {
                write!(f, "window factorization failed for mode {mode}: {source}")
            }
            PintError::Shape { what, expected, got } => {
                write!(f, "{what}: expected {expected} entries, got {got}")
            }
            PintError::InvalidOption { name, reason } => write!(f, "{name}: {reason}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for PintError {}

impl From<ModelError> for PintError {
    fn from(e: ModelError) -> Self {
        PintError::Model(e)
    }
}

impl From<ModesError> for PintError {
    fn from(e: ModesError) -> Self {
        PintError::Modes(e)
    }
}

/// One window, one mode: the trapezoidal two-field system on `K` steps.
///
/// Unknowns are interleaved as `(q_0, z_1, q_1, z_2, ..., q_{K-1}, z_K)`
/// where `z` is the state mode coefficient and `q` the adjoint one; the
/// left state value `z_0` and the right adjoint value `q_K` are boundary
/// data. Row `2k` is the adjoint equation of step `k`, row `2k+1` the
/// state equation, giving bandwidths (2, 2) and a matrix that depends
/// only on `(lambda, nu, h_t, K)`, never on the window position.
fn window_matrix(lambda: f64, nu: f64, h_t: f64, steps: usize) -> Banded {
    let n = 2 * steps;
    let a = 1.0 / h_t;
    let mut m = Banded::new(n, 2, 2);
    for k in 0..steps {
        let r = 2 * k;
        // Adjoint step k: q'(t) - lambda q = z - target.
        m.set(r, 2 * k, -(a + 0.5 * lambda));
        m.set(r, 2 * k + 1, -0.5);
        if k + 1 < steps {
            m.set(r, 2 * k + 2, a - 0.5 * lambda);
        }
        if k >= 1 {
            m.set(r, 2 * k - 1, -0.5);
        }
        // State step k: z'(t) + lambda z = q / nu.
        let r = 2 * k + 1;
        m.set(r, 2 * k + 1, a + 0.5 * lambda);
        m.set(r, 2 * k, -0.5 / nu);
        if k + 1 < steps {
            m.set(r, 2 * k + 2, -0.5 / nu);
        }
        if k >= 1 {
            m.set(r, 2 * k - 1, 0.5 * lambda - a);
        }
    }
    m
}

/// Fills the right-hand side for one mode of one window.
///
/// `target` holds the mode's target samples at the window's `K + 1` local
/// time levels; `zl` and `ql` are the boundary mode data (left state,
/// right adjoint).
fn window_rhs(
    lambda: f64,
    nu: f64,
    h_t: f64,
    steps: usize,
    target: impl Fn(usize) -> f64,
    zl: f64,
    qr: f64,
    out: &mut [f64],
) {
    let a = 1.0 / h_t;
    debug_assert_eq!(out.len(), 2 * steps);
    for k in 0..steps {
        let mut adj = -0.5 * (target(k) + target(k + 1));
        if k == 0 {
            adj += 0.5 * zl;
        }
        if k + 1 == steps {
            adj -= (a - 0.5 * lambda) * qr;
        }
        out[2 * k] = adj;
        let mut st = 0.0;
        if k == 0 {
            st += (a - 0.5 * lambda) * zl;
        }
        if k + 1 == steps {
            st += 0.5 * qr / nu;
        }
        out[2 * k + 1] = st;
    }
}

/// Precomputed per-mode factorizations and mode-space data for one
/// problem decomposition.
pub struct SchwarzSolver {
    spec: ProblemSpec,
    basis: EigenBasis,
    factors: Vec<BandedLu>,
    /// Mode-major target coefficients: entry `m * levels + l` is mode `m`
    /// of the target at global time level `l`.
    target_modes: Vec<f64>,
    y0_nodal: Vec<f64>,
}

impl SchwarzSolver {
    pub fn new(spec: ProblemSpec, target: &SpaceTimeField, y0: &[f64]) -> Result<Self, PintError> {
        spec.validate()?;
        let time = spec.time();
        let levels = time.levels();
        let m = spec.interior_points;
        if target.levels() != levels {
            return Err(PintError::Shape {
                what: "target time levels",
                expected: levels,
                got: target.levels(),
            });
        }
        if target.nodes() != m {
            return Err(PintError::Shape {
                what: "target spatial nodes",
                expected: m,
                got: target.nodes(),
            });
        }
        if y0.len() != m {
            return Err(PintError::Shape { what: "initial state", expected: m, got: y0.len() });
        }
        let basis = eigenbasis(&spec.grid());
        let h_t = time.step();
        let mut factors = Vec::with_capacity(m);
        for mode in 0..m {
            let matrix = window_matrix(basis.lambda(mode), spec.nu, h_t, spec.steps_per_window);
            factors.push(
                matrix.factor().map_err(|source| PintError::Factorization { mode, source })?,
            );
        }
        let mut target_modes = vec![0.0; levels * m];
        let mut row = vec![0.0; m];
        for l in 0..levels {
            basis.forward_into(target.level(l), &mut row);
            for (mode, &v) in row.iter().enumerate() {
                target_modes[mode * levels + l] = v;
            }
        }
        Ok(Self { spec, basis, factors, target_modes, y0_nodal: y0.to_vec() })
    }

    pub fn spec(&self) -> &ProblemSpec {
        &self.spec
    }

    pub fn basis(&self) -> &EigenBasis {
        &self.basis
    }

    pub fn initial_state_nodal(&self) -> &[f64] {
        &self.y0_nodal
    }

    /// Solves one window against given nodal interface data.
    ///
    /// `left_y` is the state trace at the window's left edge, `right_p`
    /// the adjoint trace at its right edge. The first window's `left_y`
    /// is the initial state; the last window's `right_p` is zero.
    pub fn subdomain_solve(
        &self,
        window: usize,
        left_y: &[f64],
        right_p: &[f64],
    ) -> Result<WindowSolution, PintError> {
        let m = self.spec.interior_points;
        if left_y.len() != m {
            return Err(PintError::Shape { what: "left state trace", expected: m, got: left_y.len() });
        }
        if right_p.len() != m {
            return Err(PintError::Shape {
                what: "right adjoint trace",
                expected: m,
                got: right_p.len(),
            });
        }
        let zl = self.basis.forward(left_y);
        let qr = self.basis.forward(right_p);
        Ok(self.solve_window_modes(window, &zl, &qr))
    }

    /// Same as [`subdomain_solve`](Self::subdomain_solve) with the
    /// interface data already in mode space.
    fn solve_window_modes(&self, window: usize, zl: &[f64], qr: &[f64]) -> WindowSolution {
        let spec = &self.spec;
        assert!(window < spec.windows, "window index out of range");
        let m = spec.interior_points;
        let k_steps = spec.steps_per_window;
        let levels = spec.time().levels();
        let h_t = spec.time().step();
        let base = window * k_steps;
        let mut z = vec![0.0; (k_steps + 1) * m];
        let mut q = vec![0.0; (k_steps + 1) * m];
        let mut rhs = vec![0.0; 2 * k_steps];
        for mode in 0..m {
            let series = &self.target_modes[mode * levels + base..mode * levels + base + k_steps + 1];
            window_rhs(
                self.basis.lambda(mode),
                spec.nu,
                h_t,
                k_steps,
                |k| series[k],
                zl[mode],
                qr[mode],
                &mut rhs,
            );
            self.factors[mode].solve_in_place(&mut rhs);
            z[mode] = zl[mode];
            q[k_steps * m + mode] = qr[mode];
            for k in 1..=k_steps {
                z[k * m + mode] = rhs[2 * k - 1];
            }
            for k in 0..k_steps {
                q[k * m + mode] = rhs[2 * k];
            }
        }
        WindowSolution { steps: k_steps, modes: m, z, q }
    }
}

/// Mode-space solution of one window at its `K + 1` local time levels
/// (level 0 repeats the left boundary data, level `K` the right adjoint
/// data).
pub struct WindowSolution {
    steps: usize,
    modes: usize,
    z: Vec<f64>,
    q: Vec<f64>,
}

impl WindowSolution {
    pub fn steps(&self) -> usize {
        self.steps
    }

    /// State mode coefficients at local level `k`.
    pub fn state_modes(&self, k: usize) -> &[f64] {
        &self.z[k * self.modes..(k + 1) * self.modes]
    }

    /// Adjoint mode coefficients at local level `k`.
    pub fn adjoint_modes(&self, k: usize) -> &[f64] {
        &self.q[k * self.modes..(k + 1) * self.modes]
    }
}

/// Iterate state: nodal interface buffers plus the latest per-window
/// mode-space solutions.
///
/// Trace row `i` lives at the `i`-th window boundary (`N + 1` rows). Row
/// 0 of the state traces is the fixed initial condition and row `N` of
/// the adjoint traces is the fixed zero terminal condition; sweeps never
/// rewrite either. The local solutions are zero until the first sweep.
pub struct SchwarzState {
    windows: usize,
    modes: usize,
    steps: usize,
    iteration: usize,
    y_traces: Vec<f64>,
    p_traces: Vec<f64>,
    z_local: Vec<f64>,
    q_local: Vec<f64>,
}

impl SchwarzState {
    /// Zero initial guess: all exchanged traces start at zero.
    pub fn initial(solver: &SchwarzSolver) -> Self {
        let n = solver.spec.windows;
        let m = solver.spec.interior_points;
        let k = solver.spec.steps_per_window;
        let mut y_traces = vec![0.0; (n + 1) * m];
        y_traces[..m].copy_from_slice(&solver.y0_nodal);
        Self {
            windows: n,
            modes: m,
            steps: k,
            iteration: 0,
            y_traces,
            p_traces: vec![0.0; (n + 1) * m],
            z_local: vec![0.0; n * (k + 1) * m],
            q_local: vec![0.0; n * (k + 1) * m],
        }
    }

    /// Seeds the interface buffers from a monolithic solution (local
    /// fields stay zero until a sweep runs).
    pub fn from_reference(solver: &SchwarzSolver, reference: &MonolithicSolution) -> Self {
        let mut state = Self::initial(solver);
        let m = state.modes;
        let k = state.steps;
        let mut nodal = vec![0.0; m];
        for i in 0..=state.windows {
            solver.basis.inverse_into(reference.state_modes(i * k), &mut nodal);
            state.y_traces[i * m..(i + 1) * m].copy_from_slice(&nodal);
            solver.basis.inverse_into(reference.adjoint_modes(i * k), &mut nodal);
            state.p_traces[i * m..(i + 1) * m].copy_from_slice(&nodal);
        }
        state
    }

    pub fn iteration(&self) -> usize {
        self.iteration
    }

    pub fn windows(&self) -> usize {
        self.windows
    }

    /// Nodal state trace at window boundary `i`.
    pub fn y_trace(&self, i: usize) -> &[f64] {
        &self.y_traces[i * self.modes..(i + 1) * self.modes]
    }

    /// Nodal adjoint trace at window boundary `i`.
    pub fn p_trace(&self, i: usize) -> &[f64] {
        &self.p_traces[i * self.modes..(i + 1) * self.modes]
    }

    /// Overwrites the state trace at boundary `i`, e.g. to warm-start the
    /// iteration or probe its contraction from chosen data. Boundary 0 is
    /// the initial condition and is never touched by sweeps, so resetting
    /// it changes the problem being solved.
    pub fn set_y_trace(&mut self, i: usize, values: &[f64]) {
        assert_eq!(values.len(), self.modes, "trace length mismatch");
        self.y_traces[i * self.modes..(i + 1) * self.modes].copy_from_slice(values);
    }

    /// Overwrites the adjoint trace at boundary `i`. Boundary `windows` is
    /// the homogeneous terminal condition; see [`Self::set_y_trace`].
    pub fn set_p_trace(&mut self, i: usize, values: &[f64]) {
        assert_eq!(values.len(), self.modes, "trace length mismatch");
        self.p_traces[i * self.modes..(i + 1) * self.modes].copy_from_slice(values);
    }

    /// State mode coefficients of window `w` at local level `k`.
    pub fn local_state_modes(&self, w: usize, k: usize) -> &[f64] {
        let stride = (self.steps + 1) * self.modes;
        &self.z_local[w * stride + k * self.modes..w * stride + (k + 1) * self.modes]
    }

    /// Adjoint mode coefficients of window `w` at local level `k`.
    pub fn local_adjoint_modes(&self, w: usize, k: usize) -> &[f64] {
        let stride = (self.steps + 1) * self.modes;
        &self.q_local[w * stride + k * self.modes..w * stride + (k + 1) * self.modes]
    }
}

/// Interface movement of one sweep.
///
/// Increments are Euclidean norms per interface, maximized over the
/// interfaces; scales are the largest new trace norm of the same field.
/// `relative` is the stopping metric: the larger of the two per-field
/// ratios, with a zero-scale field falling back to its absolute
/// increment.
#[derive(Clone, Copy, Debug)]
pub struct SweepStats {
    pub y_increment: f64,
    pub p_increment: f64,
    pub y_scale: f64,
    pub p_scale: f64,
    pub relative: f64,
}

fn relative_part(increment: f64, scale: f64) -> f64 {
    if increment == 0.0 {
        0.0
    } else if scale > 0.0 {
        increment / scale
    } else {
        increment
    }
}

/// Runs one Jacobi sweep: every window solves against the previous
/// iteration's traces, then the buffers are swapped.
pub fn schwarz_sweep(
    solver: &SchwarzSolver,
    state: &mut SchwarzState,
    pool: &impl ParallelMap,
) -> SweepStats {
    let n = state.windows;
    let m = state.modes;
    let k = state.steps;
    let results = pool.map(n, |w| {
        let zl = solver.basis.forward(state.y_trace(w));
        let qr = solver.basis.forward(state.p_trace(w + 1));
        let sol = solver.solve_window_modes(w, &zl, &qr);
        let right_state = solver.basis.inverse(sol.state_modes(k));
        let left_adjoint = solver.basis.inverse(sol.adjoint_modes(0));
        (sol, right_state, left_adjoint)
    });
    let mut y_new = state.y_traces.clone();
    let mut p_new = state.p_traces.clone();
    let stride = (k + 1) * m;
    for (w, (sol, right_state, left_adjoint)) in results.into_iter().enumerate() {
        y_new[(w + 1) * m..(w + 2) * m].copy_from_slice(&right_state);
        p_new[w * m..(w + 1) * m].copy_from_slice(&left_adjoint);
        state.z_local[w * stride..(w + 1) * stride].copy_from_slice(&sol.z);
        state.q_local[w * stride..(w + 1) * stride].copy_from_slice(&sol.q);
    }
    let trace_stats = |new: &[f64], old: &[f64]| {
        let mut increment = 0.0f64;
        let mut scale = 0.0f64;
        for i in 0..=n {
            let mut d2 = 0.0;
            let mut s2 = 0.0;
            for j in i * m..(i + 1) * m {
                let d = new[j] - old[j];
                d2 += d * d;
                s2 += new[j] * new[j];
            }
            let d = fmath::sqrt(d2);
            let s = fmath::sqrt(s2);
            if d > increment {
                increment = d;
            }
            if s > scale {
                scale = s;
            }
        }
        (increment, scale)
    };
    let (y_increment, y_scale) = trace_stats(&y_new, &state.y_traces);
    let (p_increment, p_scale) = trace_stats(&p_new, &state.p_traces);
    state.y_traces = y_new;
    state.p_traces = p_new;
    state.iteration += 1;
    let relative =
        relative_part(y_increment, y_scale).max(relative_part(p_increment, p_scale));
    SweepStats { y_increment, p_increment, y_scale, p_scale, relative }
}

#[derive(Clone, Copy, Debug)]
pub struct SolveOptions {
    pub tol: f64,
    pub max_iters: usize,
}

/// One history row of [`schwarz_solve`]. The error columns are absolute
/// space-time L2 errors against the supplied reference, blank otherwise.
#[derive(Clone, Copy, Debug)]
pub struct IterationRecord {
    pub iteration: usize,
    pub interface_increment: f64,
    pub err_y: Option<f64>,
    pub err_p: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct SolveReport {
    pub converged: bool,
    pub iterations: usize,
    pub history: Vec<IterationRecord>,
}

/// Sweeps until the relative interface increment drops to `tol` or the
/// iteration budget runs out.
pub fn schwarz_solve(
    solver: &SchwarzSolver,
    state: &mut SchwarzState,
    options: SolveOptions,
    reference: Option<&MonolithicSolution>,
    pool: &impl ParallelMap,
) -> Result<SolveReport, PintError> {
    if !(options.tol > 0.0) {
        return Err(PintError::InvalidOption { name: "tol", reason: "must be positive" });
    }
    if options.max_iters == 0 {
        return Err(PintError::InvalidOption { name: "max_iters", reason: "must be at least 1" });
    }
    let mut history = Vec::new();
    let mut converged = false;
    for _ in 0..options.max_iters {
        let stats = schwarz_sweep(solver, state, pool);
        let (err_y, err_p) = match reference {
            Some(r) => {
                let (ey, ep) = l2q_errors_vs_reference(solver, state, r)?;
                (Some(ey), Some(ep))
            }
            None => (None, None),
        };
        history.push(IterationRecord {
            iteration: state.iteration,
            interface_increment: stats.relative,
            err_y,
            err_p,
        });
        if stats.relative <= options.tol {
            converged = true;
            break;
        }
    }
    Ok(SolveReport { converged, iterations: history.len(), history })
}

/// Exact solution of the global space-time discretization, stored as
/// mode coefficients per global time level.
pub struct MonolithicSolution {
    spec: ProblemSpec,
    modes: usize,
    z: Vec<f64>,
    q: Vec<f64>,
}

/// Solves the full-horizon discrete optimality system, one banded solve
/// per mode over all `N * K` steps. This is the exact fixed point of
/// [`schwarz_sweep`]: the window systems are the rows of this system,
/// partitioned at the interfaces.
pub fn monolithic_solve(
    spec: ProblemSpec,
    target: &SpaceTimeField,
    y0: &[f64],
) -> Result<MonolithicSolution, PintError> {
    spec.validate()?;
    let time = spec.time();
    let levels = time.levels();
    let steps = time.total_steps();
    let m = spec.interior_points;
    if target.levels() != levels {
        return Err(PintError::Shape {
            what: "target time levels",
            expected: levels,
            got: target.levels(),
        });
    }
    if target.nodes() != m {
        return Err(PintError::Shape { what: "target spatial nodes", expected: m, got: target.nodes() });
    }
    if y0.len() != m {
        return Err(PintError::Shape { what: "initial state", expected: m, got: y0.len() });
    }
    let basis = eigenbasis(&spec.grid());
    let h_t = time.step();
    let mut target_modes = vec![0.0; levels * m];
    let mut row = vec![0.0; m];
    for l in 0..levels {
        basis.forward_into(target.level(l), &mut row);
        for (mode, &v) in row.iter().enumerate() {
            target_modes[mode * levels + l] = v;
        }
    }
    let y0_modes = basis.forward(y0);
    let mut z = vec![0.0; levels * m];
    let mut q = vec![0.0; levels * m];
    let mut rhs = vec![0.0; 2 * steps];
    for mode in 0..m {
        let lambda = basis.lambda(mode);
        let lu = window_matrix(lambda, spec.nu, h_t, steps)
            .factor()
            .map_err(|source| PintError::Factorization { mode, source })?;
        let series = &target_modes[mode * levels..(mode + 1) * levels];
        window_rhs(lambda, spec.nu, h_t, steps, |k| series[k], y0_modes[mode], 0.0, &mut rhs);
        lu.solve_in_place(&mut rhs);
        z[mode] = y0_modes[mode];
        for l in 1..=steps {
            z[l * m + mode] = rhs[2 * l - 1];
        }
        for l in 0..steps {
            q[l * m + mode] = rhs[2 * l];
        }
    }
    Ok(MonolithicSolution { spec, modes: m, z, q })
}

impl MonolithicSolution {
    pub fn spec(&self) -> &ProblemSpec {
        &self.spec
    }

    /// State mode coefficients at global time level `l`.
    pub fn state_modes(&self, l: usize) -> &[f64] {
        &self.z[l * self.modes..(l + 1) * self.modes]
    }

    /// Adjoint mode coefficients at global time level `l`.
    pub fn adjoint_modes(&self, l: usize) -> &[f64] {
        &self.q[l * self.modes..(l + 1) * self.modes]
    }

    /// Nodal state, adjoint, and control fields.
    pub fn fields(&self) -> SolutionFields {
        let basis = eigenbasis(&self.spec.grid());
        let levels = self.spec.time().levels();
        let m = self.modes;
        let mut y = SpaceTimeField::zeros(levels, m);
        let mut p = SpaceTimeField::zeros(levels, m);
        let mut nodal = vec![0.0; m];
        for l in 0..levels {
            basis.inverse_into(self.state_modes(l), &mut nodal);
            y.level_mut(l).copy_from_slice(&nodal);
            basis.inverse_into(self.adjoint_modes(l), &mut nodal);
            p.level_mut(l).copy_from_slice(&nodal);
        }
        let u = scaled_field(&p, 1.0 / self.spec.nu);
        SolutionFields { y, p, u }
    }

    /// Space-time L2 norms of the state and adjoint (trapezoidal in time,
    /// uniform spatial weight).
    pub fn l2q_norms(&self) -> (f64, f64) {
        let time = self.spec.time();
        let h_x = self.spec.grid().spacing();
        let h_t = time.step();
        let levels = time.levels();
        let mut ny = 0.0;
        let mut np = 0.0;
        for l in 0..levels {
            let w = if l == 0 || l + 1 == levels { 0.5 } else { 1.0 };
            let mut sy = 0.0;
            let mut sp = 0.0;
            for mode in 0..self.modes {
                let zc = self.z[l * self.modes + mode];
                let qc = self.q[l * self.modes + mode];
                sy += zc * zc;
                sp += qc * qc;
            }
            ny += w * h_t * h_x * sy;
            np += w * h_t * h_x * sp;
        }
        (fmath::sqrt(ny), fmath::sqrt(np))
    }
}

/// Space-time L2 errors `(state, adjoint)` of the current iterate against
/// a monolithic reference.
///
/// Each window integrates its own closed time slab with trapezoidal
/// weights, so interface levels contribute half weight from each side; at
/// convergence the two sides coincide and the measure equals the global
/// trapezoidal norm.
pub fn l2q_errors_vs_reference(
    solver: &SchwarzSolver,
    state: &SchwarzState,
    reference: &MonolithicSolution,
) -> Result<(f64, f64), PintError> {
    let spec = &solver.spec;
    if reference.spec.time().levels() != spec.time().levels()
        || reference.modes != spec.interior_points
    {
        return Err(PintError::Shape {
            what: "reference solution levels",
            expected: spec.time().levels() * spec.interior_points,
            got: reference.spec.time().levels() * reference.modes,
        });
    }
    let m = spec.interior_points;
    let k = spec.steps_per_window;
    let h_x = spec.grid().spacing();
    let h_t = spec.time().step();
    let mut ey = 0.0;
    let mut ep = 0.0;
    for w in 0..state.windows {
        for kk in 0..=k {
            let weight = if kk == 0 || kk == k { 0.5 } else { 1.0 };
            let zs = state.local_state_modes(w, kk);
            let qs = state.local_adjoint_modes(w, kk);
            let zr = reference.state_modes(w * k + kk);
            let qr = reference.adjoint_modes(w * k + kk);
            let mut dy = 0.0;
            let mut dp = 0.0;
            for mode in 0..m {
                let a = zs[mode] - zr[mode];
                let b = qs[mode] - qr[mode];
                dy += a * a;
                dp += b * b;
            }
            ey += weight * h_t * h_x * dy;
            ep += weight * h_t * h_x * dp;
        }
    }
    Ok((fmath::sqrt(ey), fmath::sqrt(ep)))
}

/// Nodal state, adjoint, and control fields of a solver run.
pub struct SolutionFields {
    pub y: SpaceTimeField,
    pub p: SpaceTimeField,
    pub u: SpaceTimeField,
}

fn scaled_field(field: &SpaceTimeField, factor: f64) -> SpaceTimeField {
    let mut out = SpaceTimeField::zeros(field.levels(), field.nodes());
    for (dst, src) in out.as_mut_slice().iter_mut().zip(field.as_slice()) {
        *dst = factor * src;
    }
    out
}

/// Concatenates the per-window solutions into global nodal fields.
///
/// Shared time levels are owned by one side: the state value at an
/// interface comes from the window ending there, the adjoint value from
/// the window starting there (matching which window actually solves for
/// that unknown). Level 0 of the state is the initial condition; the
/// terminal adjoint level is zero.
pub fn assemble_fields(solver: &SchwarzSolver, state: &SchwarzState) -> SolutionFields {
    let spec = &solver.spec;
    let m = spec.interior_points;
    let k = spec.steps_per_window;
    let levels = spec.time().levels();
    let total = spec.time().total_steps();
    let mut y = SpaceTimeField::zeros(levels, m);
    let mut p = SpaceTimeField::zeros(levels, m);
    let mut nodal = vec![0.0; m];
    y.level_mut(0).copy_from_slice(&solver.y0_nodal);
    for l in 1..levels {
        let w = (l - 1) / k;
        solver.basis.inverse_into(state.local_state_modes(w, l - w * k), &mut nodal);
        y.level_mut(l).copy_from_slice(&nodal);
    }
    for l in 0..total {
        let w = l / k;
        solver.basis.inverse_into(state.local_adjoint_modes(w, l - w * k), &mut nodal);
        p.level_mut(l).copy_from_slice(&nodal);
    }
    let u = scaled_field(&p, 1.0 / spec.nu);
    SolutionFields { y, p, u }
}
