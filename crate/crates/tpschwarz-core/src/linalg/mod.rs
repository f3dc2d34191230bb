//! Minimal dense and banded linear algebra backing the solver and the
//! spectral analysis.
//!
//! Only what the crate needs is implemented: a row-major dense matrix with
//! a nonsymmetric eigensolver (balancing, Householder reduction to
//! Hessenberg form, Francis double-shift QR), and a compact banded LU with
//! partial pivoting for the Crank-Nicolson systems. Both are small, have
//! no dependencies, and work without the standard library.

mod banded;
mod dense;
mod eig;

pub use banded::{Banded, BandedError, BandedLu};
pub use dense::DenseMatrix;
pub use eig::{eigenvalues, spectral_radius, EigenError};
