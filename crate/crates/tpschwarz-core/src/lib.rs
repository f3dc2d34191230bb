//! Time-parallel Schwarz iteration and spectral analysis for a
//! linear-quadratic parabolic optimal control problem on an interval.
//!
//! The state equation is the heat equation on (0, L) x (0, T) with
//! homogeneous Dirichlet boundary values; the control acts distributed in
//! the right-hand side and the objective tracks a target trajectory with an
//! L2 regularization weighted by `nu`. Eliminating the control through the
//! optimality condition couples the state to an adjoint running backward in
//! time. This crate provides
//!
//! * [`model`]: problem description, grids, space-time fields, the discrete
//!   Laplacian, and built-in scenarios;
//! * [`modes`]: the sine eigenbasis diagonalizing the Laplacian and the
//!   per-mode interface coupling coefficients;
//! * [`theory`]: the interface iteration matrix of the Schwarz method on
//!   nonoverlapping time windows together with its norms, spectrum, and
//!   symbol curves;
//! * [`pint`]: the Crank-Nicolson discretization, the windowed Schwarz
//!   solver, and the monolithic all-at-once solver it converges to;
//! * [`linalg`]: the dense nonsymmetric eigensolver and the banded LU
//!   factorization backing the above.
//!
//! The crate is `no_std`-compatible (with `alloc`): disable default
//! features and enable `libm` to build without the standard library.
//! Parallel execution of the per-window solves is injected through
//! [`pint::ParallelMap`], so an executor (e.g. a rayon pool) can live in a
//! companion crate.
#![cfg_attr(not(feature = "std"), no_std)]
#![forbid(unsafe_code)]

#[cfg(all(not(feature = "std"), not(feature = "libm")))]
compile_error!("tpschwarz-core requires either the `std` or the `libm` feature");

extern crate alloc;

pub mod fmath;
pub mod linalg;
pub mod model;
pub mod modes;
pub mod pint;
pub mod theory;

pub use num_complex::Complex64;
