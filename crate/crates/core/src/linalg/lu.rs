use crate::complex::Complex;
use crate::error::{Error, Result};
use crate::matrix::{Matrix, Vector};
use crate::scalar::Field;

/// `P·A = L·U` with unit-diagonal `L` stored below the diagonal of `lu`.
///
/// Pivoting: the exact backend takes the first nonzero entry of the column,
/// float backends take the largest modulus. A float pivot whose squared
/// modulus falls below [`Field::pivot_threshold_sq`] of `‖A‖_F²` counts as
/// singular (`2^-50·‖A‖_F` for machine floats, `2^-(p-3)·‖A‖_F` for big floats).
#[derive(Debug, Clone)]
pub struct LuFactors<T: Field> {
    lu: Matrix<T>,
    /// Row `i` of `P·A` is row `perm[i]` of `A`.
    perm: Vec<usize>,
}

impl<T: Field> LuFactors<T> {
    pub fn factor(a: &Matrix<T>) -> Result<Self> {
        let n = a.require_square()?;
        let threshold = T::pivot_threshold_sq(&a.frobenius_norm_sqr());
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let pivot_row = if T::EXACT {
                (k..n).find(|&i| !lu[(i, k)].is_zero())
            } else {
                let mut best: Option<(usize, T)> = None;
                for i in k..n {
                    let m = lu[(i, k)].norm_sqr();
                    if best.as_ref().is_none_or(|(_, b)| m > *b) {
                        best = Some((i, m));
                    }
                }
                best.filter(|(_, m)| !m.is_zero() && *m > threshold)
                    .map(|(i, _)| i)
            };
            let p = pivot_row.ok_or(Error::Singular { pivot: k })?;
            if p != k {
                for j in 0..n {
                    let tmp = lu[(k, j)].clone();
                    lu[(k, j)] = lu[(p, j)].clone();
                    lu[(p, j)] = tmp;
                }
                perm.swap(k, p);
            }
            let pivot = lu[(k, k)].clone();
            for i in k + 1..n {
                if lu[(i, k)].is_zero() {
                    continue;
                }
                let factor = lu[(i, k)].clone() / pivot.clone();
                for j in k + 1..n {
                    if lu[(k, j)].is_zero() {
                        continue;
                    }
                    let ukj = lu[(k, j)].clone();
                    let mut v = lu[(i, j)].clone();
                    v.add_mul(&-factor.clone(), &ukj);
                    lu[(i, j)] = v;
                }
                lu[(i, k)] = factor;
            }
        }
        Ok(LuFactors { lu, perm })
    }

    pub fn dim(&self) -> usize {
        self.lu.rows()
    }

    /// Solves `A x = b`.
    pub fn solve(&self, b: &[Complex<T>]) -> Vec<Complex<T>> {
        let n = self.dim();
        assert_eq!(b.len(), n);
        let mut y: Vec<Complex<T>> = self.perm.iter().map(|&p| b[p].clone()).collect();
        for i in 0..n {
            for k in 0..i {
                let l = &self.lu[(i, k)];
                if !l.is_zero() && !y[k].is_zero() {
                    let yk = y[k].clone();
                    y[i].add_mul(&-l.clone(), &yk);
                }
            }
        }
        for i in (0..n).rev() {
            for k in i + 1..n {
                let u = &self.lu[(i, k)];
                if !u.is_zero() && !y[k].is_zero() {
                    let yk = y[k].clone();
                    y[i].add_mul(&-u.clone(), &yk);
                }
            }
            y[i] = y[i].clone() / self.lu[(i, i)].clone();
        }
        y
    }

    /// Solves `A† x = b` with the same factors.
    pub fn solve_adjoint(&self, b: &[Complex<T>]) -> Vec<Complex<T>> {
        // A† = U† L† P, so solve U† y = b, then L† z = y, then x = Pᵀ z.
        let n = self.dim();
        assert_eq!(b.len(), n);
        let mut y: Vec<Complex<T>> = b.to_vec();
        for i in 0..n {
            for k in 0..i {
                let u = &self.lu[(k, i)];
                if !u.is_zero() && !y[k].is_zero() {
                    let yk = y[k].clone();
                    y[i].add_mul(&-u.conj(), &yk);
                }
            }
            y[i] = y[i].clone() / self.lu[(i, i)].conj();
        }
        for i in (0..n).rev() {
            for k in i + 1..n {
                let l = &self.lu[(k, i)];
                if !l.is_zero() && !y[k].is_zero() {
                    let yk = y[k].clone();
                    y[i].add_mul(&-l.conj(), &yk);
                }
            }
        }
        let mut x = vec![Complex::zero(self.lu.ctx()); n];
        for (i, &p) in self.perm.iter().enumerate() {
            x[p] = y[i].clone();
        }
        x
    }
}

/// Inverse of a square nonsingular matrix via LU with partial pivoting.
pub fn mat_inverse<T: Field>(a: &Matrix<T>) -> Result<Matrix<T>> {
    let lu = LuFactors::factor(a)?;
    let n = lu.dim();
    let ctx = a.ctx();
    let mut inv = Matrix::zeros(n, n, ctx);
    for j in 0..n {
        let e = Vector::basis(n, j, ctx);
        let col = lu.solve(e.as_slice());
        for (i, z) in col.into_iter().enumerate() {
            inv[(i, j)] = z;
        }
    }
    Ok(inv)
}
