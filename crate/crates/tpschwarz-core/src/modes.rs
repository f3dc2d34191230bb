//! Eigenbasis of the discrete Laplacian and per-mode interface coupling
//! coefficients.
//!
//! The Dirichlet second-difference matrix on `M` uniform interior nodes is
//! diagonalized by the discrete sine basis; expanding state and adjoint in
//! that basis decouples the optimality system into `M` independent pairs
//! of scalar ODEs, one per eigenvalue `lambda`. For a time window of
//! length `dt`, the window-to-window interaction of mode `lambda` reduces
//! to two scalars `C1 < 0 < C2 < 1` built from `sigma = sqrt(lambda^2 +
//! 1/nu)`; every norm, spectrum, and convergence-rate statement about the
//! windowed iteration is a function of `(C1, C2, nu)` alone.

use alloc::vec;
use alloc::vec::Vec;

use crate::fmath;
use crate::model::SpatialGrid;

#[derive(Clone, Debug, PartialEq)]
pub enum ModesError {
    InvalidParameter { name: &'static str, reason: &'static str },
    DimensionMismatch { expected: usize, got: usize },
    /// Supplied eigenvectors fail the orthonormality screen.
    NotOrthonormal { deviation: f64 },
}

impl core::fmt::Display for ModesError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            ModesError::InvalidParameter { name, reason } => {
                write!(f, "invalid parameter `{name}`: {reason}")
            }
            ModesError::DimensionMismatch { expected, got } => {
                write!(f, "dimension mismatch: expected {expected}, got {got}")
            }
            ModesError::NotOrthonormal { deviation } => {
                write!(f, "eigenvector set deviates from orthonormality by {deviation:.3e}")
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for ModesError {}

/// Orthonormal eigenpairs of the discrete `-Lap`; columns are stored
/// mode-major so both transforms stream through memory.
#[derive(Clone, Debug)]
pub struct EigenBasis {
    size: usize,
    lambdas: Vec<f64>,
    /// Column-major: `phi[m * size + j]` is node `j` of eigenvector `m`.
    phi: Vec<f64>,
}

/// Analytic eigenbasis of [`crate::model::build_laplacian`]:
/// `lambda_m = (4/h^2) sin^2(m pi h / (2L))` with the orthonormal sine
/// eigenvectors `sqrt(2/(M+1)) sin(j m pi / (M+1))`.
pub fn eigenbasis(grid: &SpatialGrid) -> EigenBasis {
    let m = grid.interior_points;
    let h = grid.spacing();
    let mp1 = (m + 1) as f64;
    let mut lambdas = Vec::with_capacity(m);
    let mut phi = vec![0.0; m * m];
    let scale = fmath::sqrt(2.0 / mp1);
    for k in 0..m {
        let arg = (k + 1) as f64 * core::f64::consts::PI / (2.0 * mp1);
        let s = fmath::sin(arg);
        lambdas.push(4.0 / (h * h) * s * s);
        for j in 0..m {
            let ang = ((j + 1) * (k + 1)) as f64 * core::f64::consts::PI / mp1;
            phi[k * m + j] = scale * fmath::sin(ang);
        }
    }
    EigenBasis { size: m, lambdas, phi }
}

impl EigenBasis {
    /// Builds from externally tabulated eigenpairs (column-major vectors).
    /// The set must be orthonormal to within `1e-8` in the max norm.
    pub fn from_parts(lambdas: Vec<f64>, vectors: Vec<f64>) -> Result<Self, ModesError> {
        let size = lambdas.len();
        if size == 0 {
            return Err(ModesError::InvalidParameter { name: "lambdas", reason: "must be nonempty" });
        }
        if vectors.len() != size * size {
            return Err(ModesError::DimensionMismatch { expected: size * size, got: vectors.len() });
        }
        for &l in &lambdas {
            if !(l.is_finite() && l > 0.0) {
                return Err(ModesError::InvalidParameter {
                    name: "lambdas",
                    reason: "eigenvalues must be finite and positive",
                });
            }
        }
        let mut deviation = 0.0f64;
        for a in 0..size {
            for b in a..size {
                let mut dot = 0.0;
                for j in 0..size {
                    dot += vectors[a * size + j] * vectors[b * size + j];
                }
                let target = if a == b { 1.0 } else { 0.0 };
                let d = fmath::abs(dot - target);
                if d > deviation {
                    deviation = d;
                }
            }
        }
        if deviation > 1e-8 {
            return Err(ModesError::NotOrthonormal { deviation });
        }
        Ok(Self { size, lambdas, phi: vectors })
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.size
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.size == 0
    }

    /// Eigenvalue of mode `k` (zero-based).
    #[inline]
    pub fn lambda(&self, k: usize) -> f64 {
        self.lambdas[k]
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    /// Nodal values -> mode coefficients (multiplication by Phi^T).
    pub fn forward(&self, nodal: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.size];
        self.forward_into(nodal, &mut out);
        out
    }

    pub fn forward_into(&self, nodal: &[f64], coeffs: &mut [f64]) {
        assert_eq!(nodal.len(), self.size);
        assert_eq!(coeffs.len(), self.size);
        for k in 0..self.size {
            let col = &self.phi[k * self.size..(k + 1) * self.size];
            let mut s = 0.0;
            for (p, v) in col.iter().zip(nodal) {
                s += p * v;
            }
            coeffs[k] = s;
        }
    }

    /// Mode coefficients -> nodal values (multiplication by Phi).
    pub fn inverse(&self, coeffs: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.size];
        self.inverse_into(coeffs, &mut out);
        out
    }

    pub fn inverse_into(&self, coeffs: &[f64], nodal: &mut [f64]) {
        assert_eq!(coeffs.len(), self.size);
        assert_eq!(nodal.len(), self.size);
        nodal.fill(0.0);
        for k in 0..self.size {
            let c = coeffs[k];
            if c == 0.0 {
                continue;
            }
            let col = &self.phi[k * self.size..(k + 1) * self.size];
            for (n, p) in nodal.iter_mut().zip(col) {
                *n += c * p;
            }
        }
    }

    /// Interface coupling coefficients of every mode for a window of
    /// length `dt`.
    pub fn mode_coefficients(&self, nu: f64, dt: f64) -> Result<Vec<ModeCoefficients>, ModesError> {
        self.lambdas.iter().map(|&l| coefficients(l, nu, dt)).collect()
    }
}

/// Scalar interface data of one mode: a window of length `dt` maps its
/// incoming traces to outgoing ones through `C1` and `C2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModeCoefficients {
    pub lambda: f64,
    pub nu: f64,
    pub dt: f64,
    /// `sigma = sqrt(lambda^2 + 1/nu)`, the decoupled decay rate.
    pub sigma: f64,
    /// `-(1/nu) sinh(sigma dt) / (sigma cosh(sigma dt) + lambda sinh(sigma dt))`, negative.
    pub c1: f64,
    /// `sigma / (sigma cosh(sigma dt) + lambda sinh(sigma dt))`, in (0, 1).
    pub c2: f64,
}

/// Evaluates the coupling coefficients of one mode.
///
/// Uses the exponential-ratio form throughout: with `x = sigma dt`,
/// `q = 1 - e^{-2x}` (via expm1) and `den = sigma (1 + e^{-2x}) + lambda q`,
///
/// ```text
///   C1 = -(1/nu) q / den,      C2 = 2 sigma e^{-x} / den.
/// ```
///
/// This is algebraically identical to the cosh/sinh form but never
/// overflows and loses no precision for small `x`. For `x` beyond about
/// 745, `e^{-x}` underflows and `C2` is exactly zero: neighboring windows
/// decouple, which downstream code handles as an honest degenerate limit.
pub fn coefficients(lambda: f64, nu: f64, dt: f64) -> Result<ModeCoefficients, ModesError> {
    if !(lambda.is_finite() && lambda >= 0.0) {
        return Err(ModesError::InvalidParameter {
            name: "lambda",
            reason: "must be finite and nonnegative",
        });
    }
    if !(nu.is_finite() && nu > 0.0) {
        return Err(ModesError::InvalidParameter { name: "nu", reason: "must be finite and positive" });
    }
    if !(dt.is_finite() && dt > 0.0) {
        return Err(ModesError::InvalidParameter { name: "dt", reason: "must be finite and positive" });
    }
    let sigma = fmath::hypot(lambda, 1.0 / fmath::sqrt(nu));
    let x = sigma * dt;
    let em = fmath::exp(-x);
    let q = -fmath::exp_m1(-2.0 * x);
    let den = sigma * (1.0 + em * em) + lambda * q;
    let c1 = -(q / den) / nu;
    let c2 = 2.0 * sigma * em / den;
    Ok(ModeCoefficients { lambda, nu, dt, sigma, c1, c2 })
}
