//! One-step evolution operators `x ↦ A x`.

use crate::complex::Complex;
use crate::error::{Error, Result};
use crate::linalg::exp_action_terms;
use crate::matrix::{Matrix, Vector};
use crate::scalar::{Field, FloatField};

/// Applies one time step to a state vector.
pub trait Propagator<T: Field>: Send + Sync {
    fn dim(&self) -> usize;
    fn apply(&self, x: &Vector<T>) -> Result<Vector<T>>;
}

/// Matrix stored row by row with only its nonzero entries.
#[derive(Debug, Clone)]
pub struct CompressedRows<T: Field> {
    dim: usize,
    ctx: T::Ctx,
    row_start: Vec<usize>,
    cols: Vec<usize>,
    values: Vec<Complex<T>>,
}

impl<T: Field> CompressedRows<T> {
    pub fn from_matrix(a: &Matrix<T>) -> Result<Self> {
        let n = a.require_square()?;
        let mut row_start = Vec::with_capacity(n + 1);
        let mut cols = Vec::new();
        let mut values = Vec::new();
        for i in 0..n {
            row_start.push(cols.len());
            for (j, z) in a.row(i).iter().enumerate() {
                if !z.is_zero() {
                    cols.push(j);
                    values.push(z.clone());
                }
            }
        }
        row_start.push(cols.len());
        Ok(CompressedRows {
            dim: n,
            ctx: a.ctx(),
            row_start,
            cols,
            values,
        })
    }

    pub fn nonzeros(&self) -> usize {
        self.values.len()
    }

    fn check(&self, x: &Vector<T>) -> Result<()> {
        if x.dim() != self.dim {
            return Err(Error::dims(format!(
                "{0}x{0} operator applied to a {1}-vector",
                self.dim,
                x.dim()
            )));
        }
        if x.ctx() != self.ctx {
            return Err(Error::PrecisionMismatch {
                left: T::precision(self.ctx).to_string(),
                right: T::precision(x.ctx()).to_string(),
            });
        }
        Ok(())
    }

    fn mul(&self, x: &[Complex<T>]) -> Vec<Complex<T>> {
        (0..self.dim)
            .map(|i| {
                let mut acc = Complex::zero(self.ctx);
                for k in self.row_start[i]..self.row_start[i + 1] {
                    let xj = &x[self.cols[k]];
                    if !xj.is_zero() {
                        acc.add_mul(&self.values[k], xj);
                    }
                }
                acc
            })
            .collect()
    }

    /// Induced 1-norm (largest absolute column sum) as an f64 upper bound.
    fn norm_1_f64(&self) -> f64
    where
        T: FloatField,
    {
        let mut sums = vec![0f64; self.dim];
        for i in 0..self.dim {
            for k in self.row_start[i]..self.row_start[i + 1] {
                sums[self.cols[k]] += self.values[k].abs().to_f64();
            }
        }
        sums.into_iter().fold(0.0, f64::max) * (1.0 + 1e-12)
    }
}

impl<T: Field> Propagator<T> for CompressedRows<T> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn apply(&self, x: &Vector<T>) -> Result<Vector<T>> {
        self.check(x)?;
        Vector::new(self.ctx, self.mul(x.as_slice()))
    }
}

/// The action of `exp(scale·H)` on a vector, for sparse `H`.
///
/// The step is split into `substeps` equal pieces with `‖scale·H‖₁/substeps ≤ 1`;
/// each piece sums the Taylor series up to the degree whose remainder bound is
/// below the unit roundoff (relative to `‖x‖₁`).
#[derive(Debug, Clone)]
pub struct ExpAction<T: FloatField> {
    generator: CompressedRows<T>,
    step: Complex<T>,
    substeps: usize,
    degree: usize,
}

impl<T: FloatField> ExpAction<T> {
    pub fn new(h: &Matrix<T>, scale: &Complex<T>) -> Result<Self> {
        let generator = CompressedRows::from_matrix(h)?;
        let ctx = h.ctx();
        let norm = generator.norm_1_f64() * scale.abs().to_f64();
        if !norm.is_finite() {
            return Err(Error::invalid("generator norm is not finite"));
        }
        let substeps = norm.ceil().max(1.0) as usize;
        let piece = norm / substeps as f64;
        let tol = T::epsilon(ctx).to_f64().max(f64::MIN_POSITIVE) / 4.0;
        let degree = exp_action_terms(piece, tol)
            .ok_or_else(|| Error::invalid("no Taylor degree reaches working precision"))?;
        let step = scale.div_real(&T::from_i64(substeps as i64, ctx));
        Ok(ExpAction {
            generator,
            step,
            substeps,
            degree,
        })
    }

    pub fn substeps(&self) -> usize {
        self.substeps
    }

    pub fn degree(&self) -> usize {
        self.degree
    }
}

impl<T: FloatField> Propagator<T> for ExpAction<T> {
    fn dim(&self) -> usize {
        self.generator.dim
    }

    fn apply(&self, x: &Vector<T>) -> Result<Vector<T>> {
        self.generator.check(x)?;
        let ctx = x.ctx();
        let mut state = x.as_slice().to_vec();
        for _ in 0..self.substeps {
            let mut acc = state.clone();
            let mut term = state;
            for k in 1..=self.degree {
                let factor = self.step.div_real(&T::from_i64(k as i64, ctx));
                term = self
                    .generator
                    .mul(&term)
                    .into_iter()
                    .map(|z| z * factor.clone())
                    .collect();
                for (a, t) in acc.iter_mut().zip(&term) {
                    *a += t.clone();
                }
            }
            state = acc;
        }
        Vector::new(ctx, state)
    }
}
