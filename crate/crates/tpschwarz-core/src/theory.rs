//! Interface iteration matrix of the windowed Schwarz method and its
//! spectral analysis.
//!
//! Eliminating the interior of every time window reduces one sweep of the
//! method, for a single spatial mode, to a linear map on the stacked
//! interface errors `(R_2, D_1, R_3, D_2, ..., R_N, D_{N-1})`, where `D_n`
//! is the state trace a window passes forward and `R_n` the adjoint-side
//! (Robin) trace it passes backward. The map is block tridiagonal with
//! repeating 2x2 blocks built from the coupling coefficients `C1, C2`:
//!
//! ```text
//!   diagonal  [[0,      C1], [-nu C1, 0 ]]
//!   right     [[C2, 0], [0, 0]]
//!   left      [[0, 0], [0, C2]]
//! ```
//!
//! This module assembles that matrix, evaluates its infinity norm in
//! closed form, the scaled 2-norm whose square `nu C1^2 + C2^2` bounds the
//! convergence factor independently of the window count, the spectral
//! radius through the dense QR eigensolver, and the limiting symbol curves
//! `mu(theta) = C2 cos(theta) +- i sqrt(C2^2 sin^2(theta) + nu C1^2)`
//! toward which the spectra cluster as windows are added.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::fmath;
use crate::linalg::{self, DenseMatrix, EigenError};
use crate::modes::ModeCoefficients;

/// Window counts above this would make dense eigencomputations unwieldy.
pub const MAX_WINDOWS: usize = 2049;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TheoryError {
    /// The interface map needs at least two windows to exist.
    TooFewWindows { got: usize },
    TooManyWindows { got: usize, max: usize },
    Eigen(EigenError),
}

impl core::fmt::Display for TheoryError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            TheoryError::TooFewWindows { got } => {
                write!(f, "interface matrix needs at least 2 windows, got {got}")
            }
            TheoryError::TooManyWindows { got, max } => {
                write!(f, "window count {got} exceeds the dense analysis cap {max}")
            }
            TheoryError::Eigen(e) => write!(f, "{e}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for TheoryError {}

impl From<EigenError> for TheoryError {
    fn from(e: EigenError) -> Self {
        TheoryError::Eigen(e)
    }
}

/// Interface error propagator of one sweep for one mode.
#[derive(Clone, Debug)]
pub struct IterationMatrix {
    coeffs: ModeCoefficients,
    windows: usize,
}

impl IterationMatrix {
    pub fn assemble(coeffs: ModeCoefficients, windows: usize) -> Result<Self, TheoryError> {
        if windows < 2 {
            return Err(TheoryError::TooFewWindows { got: windows });
        }
        if windows > MAX_WINDOWS {
            return Err(TheoryError::TooManyWindows { got: windows, max: MAX_WINDOWS });
        }
        Ok(Self { coeffs, windows })
    }

    #[inline]
    pub fn windows(&self) -> usize {
        self.windows
    }

    /// Matrix dimension `2 (N - 1)`.
    #[inline]
    pub fn dim(&self) -> usize {
        2 * (self.windows - 1)
    }

    pub fn coefficients(&self) -> &ModeCoefficients {
        &self.coeffs
    }

    /// Applies the sweep map to a stacked interface-error vector.
    pub fn apply(&self, e: &[f64]) -> Vec<f64> {
        assert_eq!(e.len(), self.dim(), "interface vector length mismatch");
        let blocks = self.windows - 1;
        let c1 = self.coeffs.c1;
        let c2 = self.coeffs.c2;
        let nu = self.coeffs.nu;
        let mut out = vec![0.0; e.len()];
        for i in 0..blocks {
            // Robin trace R_{i+2}: fed by the state trace below and, except
            // in the last window, the next Robin trace.
            let mut r = c1 * e[2 * i + 1];
            if i + 1 < blocks {
                r += c2 * e[2 * i + 2];
            }
            out[2 * i] = r;
            // State trace D_{i+1}: fed by this Robin trace and, except in
            // the first window, the previous state trace.
            let mut d = -nu * c1 * e[2 * i];
            if i > 0 {
                d += c2 * e[2 * i - 1];
            }
            out[2 * i + 1] = d;
        }
        out
    }

    /// Dense materialization (for norms, spectra, and cross-checks).
    pub fn dense(&self) -> DenseMatrix {
        let blocks = self.windows - 1;
        let c1 = self.coeffs.c1;
        let c2 = self.coeffs.c2;
        let nu = self.coeffs.nu;
        let mut m = DenseMatrix::zeros(self.dim());
        for i in 0..blocks {
            m.set(2 * i, 2 * i + 1, c1);
            m.set(2 * i + 1, 2 * i, -nu * c1);
            if i + 1 < blocks {
                m.set(2 * i, 2 * i + 2, c2);
            }
            if i > 0 {
                m.set(2 * i + 1, 2 * i - 1, c2);
            }
        }
        m
    }

    /// Scaled dense materialization `Dinv T D` with per-block scaling
    /// `diag(1, sqrt(nu))`, the similarity in which the sweep map has
    /// window-count-independent 2-norm.
    pub fn scaled_dense(&self) -> DenseMatrix {
        let rt = fmath::sqrt(self.coeffs.nu);
        let mut m = self.dense();
        let n = self.dim();
        for i in 0..n {
            for j in 0..n {
                if m.get(i, j) == 0.0 {
                    continue;
                }
                let row_scale = if i % 2 == 1 { 1.0 / rt } else { 1.0 };
                let col_scale = if j % 2 == 1 { rt } else { 1.0 };
                m.set(i, j, m.get(i, j) * row_scale * col_scale);
            }
        }
        m
    }
}

/// Max absolute row sum of the sweep map for three or more windows:
/// `max(|C1|, nu |C1|) + C2`.
///
/// With two windows the matrix is the bare diagonal block and the row sums
/// lose the `C2` coupling; use the dense route there.
pub fn infinity_norm_closed_form(c: &ModeCoefficients) -> f64 {
    let a = fmath::abs(c.c1);
    let scaled = c.nu * a;
    (if scaled > a { scaled } else { a }) + c.c2
}

/// Squared window-count-independent contraction bound `nu C1^2 + C2^2`.
///
/// Equals 1 exactly at `lambda = 0` and decreases strictly in `lambda`;
/// its square root bounds both the scaled 2-norm and (through the
/// clustering region) the spectral radius for every window count.
pub fn rho_tilde(c: &ModeCoefficients) -> f64 {
    c.nu * c.c1 * c.c1 + c.c2 * c.c2
}

/// A circulated expanded form of [`rho_tilde`] whose double-angle term
/// appears squared:
///
/// ```text
///   (lambda^2 + cosh^2(s)/nu)
///   / (lambda^2 + cosh^2(s)/nu + 2 lambda^2 sinh^2(s) + sigma lambda sinh^2(2 s))
/// ```
///
/// with `s = sigma dt`. Evaluated exactly as transcribed so reports can
/// quantify its deviation; it agrees with `rho_tilde` only where
/// `sinh(2s) ~ sinh^2(2s)`, and its hyperbolics overflow for large `s`.
/// The unsquared variant is algebraically identical to [`rho_tilde`] and
/// is exercised in tests through an overflow-safe rewriting.
pub fn rho_tilde_alt_expansion(c: &ModeCoefficients) -> f64 {
    let s = c.sigma * c.dt;
    let ch = fmath::cosh(s);
    let sh = fmath::sinh(s);
    let sh2 = fmath::sinh(2.0 * s);
    let l2 = c.lambda * c.lambda;
    let num = l2 + ch * ch / c.nu;
    let den = num + 2.0 * l2 * sh * sh + c.sigma * c.lambda * sh2 * sh2;
    num / den
}

/// Relative deviation of the as-transcribed expansion from the normative
/// contraction bound.
pub fn rho_tilde_expansion_gap(c: &ModeCoefficients) -> f64 {
    let reference = rho_tilde(c);
    fmath::abs(rho_tilde_alt_expansion(c) - reference) / reference
}

/// Induced 2-norm of the block-scaled sweep map (`sqrt(nu C1^2 + C2^2)`
/// for three or more windows, `sqrt(nu) |C1|` for two), computed from the
/// materialized scaled matrix, not the closed form.
pub fn special_norm(m: &IterationMatrix) -> Result<f64, TheoryError> {
    let s = m.scaled_dense();
    let n = s.dim();
    // Largest eigenvalue of S^T S.
    let mut gram = DenseMatrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            let mut acc = 0.0;
            for k in 0..n {
                acc += s.get(k, i) * s.get(k, j);
            }
            gram.set(i, j, acc);
        }
    }
    let eig = linalg::eigenvalues(gram)?;
    let mut top = 0.0f64;
    for z in eig {
        if z.re > top {
            top = z.re;
        }
    }
    Ok(fmath::sqrt(top))
}

/// Spectral radius via the dense QR eigensolver.
pub fn spectral_radius(m: &IterationMatrix) -> Result<f64, TheoryError> {
    Ok(linalg::spectral_radius(m.dense())?)
}

/// All eigenvalues of the sweep map.
pub fn eigenvalues(m: &IterationMatrix) -> Result<Vec<Complex64>, TheoryError> {
    Ok(linalg::eigenvalues(m.dense())?)
}

/// Eigenvalue pair of the limiting symbol at angle `theta`:
/// `C2 cos(theta) +- i sqrt((C2 sin(theta))^2 + nu C1^2)`.
pub fn symbol_eigenvalues(c: &ModeCoefficients, theta: f64) -> (Complex64, Complex64) {
    let re = c.c2 * fmath::cos(theta);
    let s = c.c2 * fmath::sin(theta);
    let im = fmath::sqrt(s * s + c.nu * c.c1 * c.c1);
    (Complex64::new(re, im), Complex64::new(re, -im))
}

/// Sampled symbol curves (both branches over a full angle sweep).
#[derive(Clone, Debug)]
pub struct SymbolCurve {
    thetas: Vec<f64>,
    plus: Vec<Complex64>,
    minus: Vec<Complex64>,
}

impl SymbolCurve {
    /// Samples both branches at `samples >= 2` angles covering `[0, 2 pi]`.
    pub fn sample(c: &ModeCoefficients, samples: usize) -> Self {
        let samples = samples.max(2);
        let mut thetas = Vec::with_capacity(samples);
        let mut plus = Vec::with_capacity(samples);
        let mut minus = Vec::with_capacity(samples);
        for i in 0..samples {
            let theta = 2.0 * core::f64::consts::PI * i as f64 / (samples - 1) as f64;
            let (a, b) = symbol_eigenvalues(c, theta);
            thetas.push(theta);
            plus.push(a);
            minus.push(b);
        }
        Self { thetas, plus, minus }
    }

    pub fn thetas(&self) -> &[f64] {
        &self.thetas
    }

    pub fn plus(&self) -> &[Complex64] {
        &self.plus
    }

    pub fn minus(&self) -> &[Complex64] {
        &self.minus
    }
}

fn point_segment_distance(z: Complex64, a: Complex64, b: Complex64) -> f64 {
    let ab = b - a;
    let az = z - a;
    let len2 = ab.re * ab.re + ab.im * ab.im;
    if len2 == 0.0 {
        return fmath::hypot(az.re, az.im);
    }
    let mut t = (az.re * ab.re + az.im * ab.im) / len2;
    if t < 0.0 {
        t = 0.0;
    } else if t > 1.0 {
        t = 1.0;
    }
    let p = Complex64::new(a.re + t * ab.re, a.im + t * ab.im);
    fmath::hypot(z.re - p.re, z.im - p.im)
}

/// Distance from `z` to the sampled symbol curves, measured against the
/// polyline through the samples (both branches).
pub fn sigma_t_distance(curve: &SymbolCurve, z: Complex64) -> f64 {
    let mut best = f64::INFINITY;
    for branch in [&curve.plus, &curve.minus] {
        for w in branch.windows(2) {
            let d = point_segment_distance(z, w[0], w[1]);
            if d < best {
                best = d;
            }
        }
    }
    best
}

/// Membership in the closed clustering region: the set bounded by the two
/// symbol branches,
///
/// ```text
///   |Re z| <= C2   and   (Im z)^2 <= C2^2 - (Re z)^2 + nu C1^2,
/// ```
///
/// slackened by `tol` in both inequalities. Every eigenvalue of the sweep
/// map lies in this region for every window count.
pub fn region_d_contains(c: &ModeCoefficients, z: Complex64, tol: f64) -> bool {
    if fmath::abs(z.re) > c.c2 + tol {
        return false;
    }
    let bound = c.c2 * c.c2 - z.re * z.re + c.nu * c.c1 * c.c1;
    z.im * z.im <= bound + tol
}

/// Per-window-count summary of norms, radius, and clustering statistics.
#[derive(Clone, Copy, Debug)]
pub struct SpectrumRow {
    pub windows: usize,
    pub rho: f64,
    pub rho_tilde: f64,
    pub sqrt_rho_tilde: f64,
    pub infinity_norm: f64,
    pub special_norm: f64,
    /// Largest distance from a computed eigenvalue to the symbol curves.
    pub max_distance: f64,
    /// Eigenvalues farther than the report's `eps` from the curves.
    pub outside_count: usize,
    /// Share of the spectrum outside the `eps` band: `outside_count / dim`.
    ///
    /// Normalizing by the matrix dimension keeps the sequence monotone
    /// under window refinement even while every eigenvalue is still
    /// outside the band (where the raw count grows with the dimension).
    pub outside_fraction: f64,
}

/// Per-eigenvalue clustering detail.
#[derive(Clone, Copy, Debug)]
pub struct EigenvalueRow {
    pub re: f64,
    pub im: f64,
    pub distance: f64,
    pub in_region: bool,
}

/// Eigenvalues of the sweep map with distances to the symbol curves and
/// region membership at tolerance `region_tol`.
pub fn eigenvalue_detail(
    c: &ModeCoefficients,
    windows: usize,
    theta_samples: usize,
    region_tol: f64,
) -> Result<Vec<EigenvalueRow>, TheoryError> {
    let m = IterationMatrix::assemble(*c, windows)?;
    let curve = SymbolCurve::sample(c, theta_samples);
    let eig = eigenvalues(&m)?;
    Ok(eig
        .into_iter()
        .map(|z| EigenvalueRow {
            re: z.re,
            im: z.im,
            distance: sigma_t_distance(&curve, z),
            in_region: region_d_contains(c, z, region_tol),
        })
        .collect())
}

/// Norm/radius/clustering summary across a list of window counts.
pub fn spectrum_report(
    c: &ModeCoefficients,
    window_counts: &[usize],
    eps: f64,
    theta_samples: usize,
) -> Result<Vec<SpectrumRow>, TheoryError> {
    let curve = SymbolCurve::sample(c, theta_samples);
    let rt = rho_tilde(c);
    let mut rows = Vec::with_capacity(window_counts.len());
    for &windows in window_counts {
        let m = IterationMatrix::assemble(*c, windows)?;
        let eig = eigenvalues(&m)?;
        let mut rho = 0.0f64;
        let mut max_distance = 0.0f64;
        let mut outside = 0usize;
        for z in &eig {
            let a = fmath::hypot(z.re, z.im);
            if a > rho {
                rho = a;
            }
            let d = sigma_t_distance(&curve, *z);
            if d > max_distance {
                max_distance = d;
            }
            if d > eps {
                outside += 1;
            }
        }
        let infinity_norm = if windows >= 3 {
            infinity_norm_closed_form(c)
        } else {
            m.dense().infinity_norm()
        };
        rows.push(SpectrumRow {
            windows,
            rho,
            rho_tilde: rt,
            sqrt_rho_tilde: fmath::sqrt(rt),
            infinity_norm,
            special_norm: special_norm(&m)?,
            max_distance,
            outside_count: outside,
            outside_fraction: outside as f64 / m.dim() as f64,
        });
    }
    Ok(rows)
}
