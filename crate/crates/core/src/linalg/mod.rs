//! Dense kernel: products, powers, inverses, extreme singular values and
//! the scaled matrix exponential.
//!
//! Every routine is a pure function with a fixed reduction order, so results
//! are bitwise reproducible for a given backend.

mod expm;
mod lu;
mod svd;

pub use expm::{exp_action_terms, mat_exp_scaled, ExpPlan};
pub use lu::{mat_inverse, LuFactors};
pub use svd::{
    jacobi_singular_values, largest_singular_value, singular_extremes, smallest_singular_value,
    SvdOptions,
};

use crate::complex::Complex;
use crate::error::{Error, Result};
use crate::matrix::{same_ctx, Matrix};
use crate::scalar::Field;

/// Matrix product `a · b`.
///
/// Exact in the rational backend, rounded once per operation otherwise.
/// Structural zeros are skipped, which keeps powers of banded matrices cheap.
pub fn mat_mul<T: Field>(a: &Matrix<T>, b: &Matrix<T>) -> Result<Matrix<T>> {
    if a.cols() != b.rows() {
        return Err(Error::dims(format!(
            "cannot multiply {}x{} by {}x{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        )));
    }
    same_ctx::<T>(a.ctx(), b.ctx())?;
    let ctx = a.ctx();
    let (n, p) = (a.rows(), b.cols());
    let mut out: Vec<Complex<T>> = vec![Complex::zero(ctx); n * p];
    for i in 0..n {
        let row_out = &mut out[i * p..(i + 1) * p];
        for (k, aik) in a.row(i).iter().enumerate() {
            if aik.is_zero() {
                continue;
            }
            for (c, bkj) in row_out.iter_mut().zip(b.row(k)) {
                if !bkj.is_zero() {
                    c.add_mul(aik, bkj);
                }
            }
        }
    }
    Matrix::new(n, p, ctx, out)
}

/// `a^t` by binary exponentiation; `a^0 = I`.
pub fn mat_pow<T: Field>(a: &Matrix<T>, t: u64) -> Result<Matrix<T>> {
    let n = a.require_square()?;
    let mut result: Option<Matrix<T>> = None;
    let mut base = a.clone();
    let mut e = t;
    while e > 0 {
        if e & 1 == 1 {
            result = Some(match result {
                None => base.clone(),
                Some(r) => mat_mul(&r, &base)?,
            });
        }
        e >>= 1;
        if e > 0 {
            base = mat_mul(&base, &base)?;
        }
    }
    Ok(result.unwrap_or_else(|| Matrix::identity(n, a.ctx())))
}
