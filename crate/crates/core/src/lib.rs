//! Multi-precision toolkit for powers of non-normal roots of the identity.
//!
//! The block matrix `A = [[B, I], [−I, 0]]` built from a tilted tridiagonal
//! Toeplitz block `B` satisfies `A^{N+2} = I`, so all its eigenvalues lie on
//! the unit circle. Yet `f(t) = ⟨w|Aᵗ|v⟩` grows like `gᵗ` for half a period
//! and then collapses: the growth rate is set by the pseudospectrum, not the
//! spectrum. This crate builds those matrices, evolves `f(t)` in exact,
//! big-float or machine arithmetic, evaluates the closed-form spectral
//! results, and maps pseudospectra.
//!
//! Modules:
//! - [`scalar`], [`complex`], [`matrix`], [`linalg`]: backends and dense kernel.
//! - [`models`]: matrix families and [`models::ModelSpec`].
//! - [`spectral`]: analytic eigensystems, condition numbers, Fourier route.
//! - [`pseudospectrum`]: `s_min` level maps and symbol curves.
//! - [`dynamics`]: time series, fits, periodicity and norm bounds.
//! - [`cli`]: the `pseudopower` command-line front end.

pub mod backend;
pub mod cli;
pub mod complex;
pub mod dynamics;
pub mod error;
pub mod io;
pub mod linalg;
pub mod matrix;
pub mod models;
pub mod precision;
pub mod pseudospectrum;
pub mod scalar;
pub mod spectral;

pub use backend::DynMatrix;
pub use complex::Complex;
pub use error::{Error, Result};
pub use matrix::{Matrix, Vector};
pub use models::{Family, ModelSpec};
pub use precision::Precision;
