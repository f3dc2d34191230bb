//! Continuous problem description and its space-time discretization grid.
//!
//! The control problem minimizes `1/2 ||y - target||^2 + nu/2 ||u||^2`
//! subject to the heat equation `dy/dt - Lap y = u` on `(0, L) x (0, T)`
//! with homogeneous Dirichlet boundary values and initial state zero (a
//! caller-supplied initial state is threaded through the solvers).
//! Eliminating `u = p / nu` couples the state to an adjoint `p` that runs
//! backward in time:
//!
//! ```text
//!   dy/dt - Lap y = p / nu,        y(., 0) given,
//!   dp/dt + Lap p = y - target,    p(., T) = 0.
//! ```
//!
//! Space is discretized with centered second differences on `M` interior
//! nodes; time is split into `N` windows of `K` uniform steps each. This
//! module owns the parameter set, the grids, dense space-time fields, the
//! discrete Laplacian, the L2 norm over the space-time cylinder, and the
//! two built-in scenarios (an exact closed-form triple and a periodic
//! heating/cooling target).

use alloc::vec;
use alloc::vec::Vec;

use crate::fmath;

/// Parameter validation failure.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ModelError {
    InvalidParameter { name: &'static str, reason: &'static str },
}

impl core::fmt::Display for ModelError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            ModelError::InvalidParameter { name, reason } => {
                write!(f, "invalid parameter `{name}`: {reason}")
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for ModelError {}

/// Full parameter set of one discrete problem instance.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProblemSpec {
    /// Length `L` of the spatial interval.
    pub domain_length: f64,
    /// Final time `T`.
    pub horizon: f64,
    /// Control penalization `nu`.
    pub nu: f64,
    /// Number of time windows `N`.
    pub windows: usize,
    /// Time steps `K` inside each window.
    pub steps_per_window: usize,
    /// Interior spatial nodes `M`.
    pub interior_points: usize,
}

impl ProblemSpec {
    pub fn validate(&self) -> Result<(), ModelError> {
        let positive = |v: f64, name: &'static str| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(ModelError::InvalidParameter { name, reason: "must be finite and positive" })
            }
        };
        positive(self.domain_length, "L")?;
        positive(self.horizon, "T")?;
        positive(self.nu, "nu")?;
        let nonzero = |v: usize, name: &'static str| {
            if v > 0 {
                Ok(())
            } else {
                Err(ModelError::InvalidParameter { name, reason: "must be at least 1" })
            }
        };
        nonzero(self.windows, "N")?;
        nonzero(self.steps_per_window, "K")?;
        nonzero(self.interior_points, "M")?;
        Ok(())
    }

    pub fn grid(&self) -> SpatialGrid {
        SpatialGrid { domain_length: self.domain_length, interior_points: self.interior_points }
    }

    pub fn time(&self) -> TimeDecomposition {
        TimeDecomposition {
            horizon: self.horizon,
            windows: self.windows,
            steps_per_window: self.steps_per_window,
        }
    }

    /// Length `T / N` of one time window.
    pub fn window_length(&self) -> f64 {
        self.horizon / self.windows as f64
    }

    /// Degrees of freedom of the discrete optimality system: both fields
    /// at every time level, endpoints included.
    pub fn unknown_count(&self) -> usize {
        2 * self.interior_points * (self.windows * self.steps_per_window + 1)
    }

    /// Unknowns one window works on, both interface levels included.
    pub fn unknowns_per_window(&self) -> usize {
        2 * self.interior_points * (self.steps_per_window + 1)
    }
}

/// Uniform grid of interior nodes on `(0, L)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpatialGrid {
    pub domain_length: f64,
    pub interior_points: usize,
}

impl SpatialGrid {
    /// Mesh width `h = L / (M + 1)`.
    pub fn spacing(&self) -> f64 {
        self.domain_length / (self.interior_points as f64 + 1.0)
    }

    /// Coordinate of interior node `j` (zero-based): `(j + 1) h`.
    pub fn node(&self, j: usize) -> f64 {
        (j + 1) as f64 * self.spacing()
    }
}

/// Uniform time levels `0..=N*K` over `[0, T]`, grouped into `N` windows.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TimeDecomposition {
    pub horizon: f64,
    pub windows: usize,
    pub steps_per_window: usize,
}

impl TimeDecomposition {
    pub fn window_length(&self) -> f64 {
        self.horizon / self.windows as f64
    }

    /// Time step `T / (N K)`.
    pub fn step(&self) -> f64 {
        self.horizon / (self.windows * self.steps_per_window) as f64
    }

    pub fn total_steps(&self) -> usize {
        self.windows * self.steps_per_window
    }

    /// Number of time levels, both endpoints included.
    pub fn levels(&self) -> usize {
        self.total_steps() + 1
    }

    pub fn time(&self, level: usize) -> f64 {
        level as f64 * self.step()
    }
}

/// Dense nodal values over all time levels, row-major by level.
#[derive(Clone, Debug, PartialEq)]
pub struct SpaceTimeField {
    levels: usize,
    nodes: usize,
    data: Vec<f64>,
}

impl SpaceTimeField {
    pub fn zeros(levels: usize, nodes: usize) -> Self {
        Self { levels, nodes, data: vec![0.0; levels * nodes] }
    }

    /// Samples `f(x, t)` at every node and level.
    pub fn from_fn(grid: &SpatialGrid, time: &TimeDecomposition, f: impl Fn(f64, f64) -> f64) -> Self {
        let levels = time.levels();
        let nodes = grid.interior_points;
        let mut data = Vec::with_capacity(levels * nodes);
        for l in 0..levels {
            let t = time.time(l);
            for j in 0..nodes {
                data.push(f(grid.node(j), t));
            }
        }
        Self { levels, nodes, data }
    }

    #[inline]
    pub fn levels(&self) -> usize {
        self.levels
    }

    #[inline]
    pub fn nodes(&self) -> usize {
        self.nodes
    }

    #[inline]
    pub fn at(&self, level: usize, node: usize) -> f64 {
        self.data[level * self.nodes + node]
    }

    #[inline]
    pub fn set(&mut self, level: usize, node: usize, v: f64) {
        self.data[level * self.nodes + node] = v;
    }

    pub fn level(&self, level: usize) -> &[f64] {
        &self.data[level * self.nodes..(level + 1) * self.nodes]
    }

    pub fn level_mut(&mut self, level: usize) -> &mut [f64] {
        &mut self.data[level * self.nodes..(level + 1) * self.nodes]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }
}

/// Symmetric tridiagonal operator; here always the discrete `-Lap`.
#[derive(Clone, Debug, PartialEq)]
pub struct Tridiagonal {
    /// Main diagonal, length `M`.
    pub diag: Vec<f64>,
    /// Sub/superdiagonal, length `M - 1`.
    pub off: Vec<f64>,
}

impl Tridiagonal {
    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        let n = self.dim();
        assert_eq!(v.len(), n);
        let mut out = vec![0.0; n];
        for i in 0..n {
            let mut s = self.diag[i] * v[i];
            if i > 0 {
                s += self.off[i - 1] * v[i - 1];
            }
            if i + 1 < n {
                s += self.off[i] * v[i + 1];
            }
            out[i] = s;
        }
        out
    }
}

/// Second-difference discretization of `-Lap` with Dirichlet boundary:
/// `2/h^2` on the diagonal, `-1/h^2` off it.
pub fn build_laplacian(grid: &SpatialGrid) -> Tridiagonal {
    let m = grid.interior_points;
    let h = grid.spacing();
    let w = 1.0 / (h * h);
    Tridiagonal { diag: vec![2.0 * w; m], off: vec![-w; m.saturating_sub(1)] }
}

/// L2 norm over the space-time cylinder: nodal quadrature in space
/// (exact for the Dirichlet eigenbasis), trapezoid rule in time.
pub fn l2q_norm(field: &SpaceTimeField, grid: &SpatialGrid, time: &TimeDecomposition) -> f64 {
    assert_eq!(field.nodes(), grid.interior_points, "field/grid node mismatch");
    assert_eq!(field.levels(), time.levels(), "field/time level mismatch");
    let h = grid.spacing();
    let ht = time.step();
    let mut total = 0.0;
    for l in 0..field.levels() {
        let w = if l == 0 || l + 1 == field.levels() { 0.5 * ht } else { ht };
        let mut s = 0.0;
        for &v in field.level(l) {
            s += v * v;
        }
        total += w * s;
    }
    fmath::sqrt(h * total)
}

/// Closed-form optimality-system solution used for convergence studies.
///
/// On the unit spatial domain, with `a = exp(-pi^2 T) / (1 + pi^2 T)`:
///
/// ```text
///   y(x,t) = sin(pi x) (t e^{-pi^2 t} - a t)
///   p(x,t) = nu sin(pi x) (e^{-pi^2 t} - a (1 + pi^2 t))
/// ```
///
/// The target is the trajectory this pair tracks exactly, obtained by
/// substituting into the adjoint equation (target = y - dp/dt - Lap p):
///
/// ```text
///   target(x,t) = sin(pi x) ((t + 2 nu pi^2) e^{-pi^2 t} - a t (1 + nu pi^4))
/// ```
///
/// All three vanish on the spatial boundary, `y` vanishes at `t = 0`, and
/// `p` vanishes at `t = T`, so the triple is admissible for any `nu > 0`.
#[derive(Clone, Copy, Debug)]
pub struct ManufacturedSolution {
    nu: f64,
    horizon: f64,
    /// `a = exp(-pi^2 T) / (1 + pi^2 T)`, the terminal-layer amplitude.
    tail: f64,
}

impl ManufacturedSolution {
    pub fn new(nu: f64, horizon: f64) -> Self {
        let l = core::f64::consts::PI * core::f64::consts::PI;
        let tail = fmath::exp(-l * horizon) / (1.0 + l * horizon);
        Self { nu, horizon, tail }
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn state(&self, x: f64, t: f64) -> f64 {
        let l = core::f64::consts::PI * core::f64::consts::PI;
        fmath::sin(core::f64::consts::PI * x) * (t * fmath::exp(-l * t) - self.tail * t)
    }

    pub fn adjoint(&self, x: f64, t: f64) -> f64 {
        let l = core::f64::consts::PI * core::f64::consts::PI;
        self.nu
            * fmath::sin(core::f64::consts::PI * x)
            * (fmath::exp(-l * t) - self.tail * (1.0 + l * t))
    }

    pub fn control(&self, x: f64, t: f64) -> f64 {
        self.adjoint(x, t) / self.nu
    }

    pub fn target(&self, x: f64, t: f64) -> f64 {
        let l = core::f64::consts::PI * core::f64::consts::PI;
        fmath::sin(core::f64::consts::PI * x)
            * ((t + 2.0 * self.nu * l) * fmath::exp(-l * t) - self.tail * t * (1.0 + self.nu * l * l))
    }
}

/// Periodic heating/cooling target: one Gaussian bump per time window,
/// centered mid-window at mid-domain.
#[derive(Clone, Copy, Debug)]
pub struct HeatcoolTarget {
    domain_length: f64,
    window_length: f64,
    windows: usize,
}

impl HeatcoolTarget {
    pub fn new(domain_length: f64, window_length: f64, windows: usize) -> Self {
        Self { domain_length, window_length, windows }
    }

    pub fn eval(&self, x: f64, t: f64) -> f64 {
        let xc = 0.5 * self.domain_length;
        let mut s = 0.0;
        for n in 1..=self.windows {
            let tc = (2 * n - 1) as f64 * 0.5 * self.window_length;
            let d2 = (x - xc) * (x - xc) + (t - tc) * (t - tc);
            s += fmath::exp(-50.0 * d2);
        }
        10.0 * s
    }
}
