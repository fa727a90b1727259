//! Dense complex matrices and vectors over any backend.

use std::ops::{Index, IndexMut};

use crate::complex::Complex;
use crate::error::{Error, Result};
use crate::precision::Precision;
use crate::scalar::{Field, FloatField};

/// Dense row-major complex matrix. All entries share one precision.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<T: Field> {
    rows: usize,
    cols: usize,
    ctx: T::Ctx,
    data: Vec<Complex<T>>,
}

/// Dense complex column vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Vector<T: Field> {
    ctx: T::Ctx,
    data: Vec<Complex<T>>,
}

fn check_ctx<T: Field>(ctx: T::Ctx, z: &Complex<T>) -> Result<()> {
    if z.re.ctx() != ctx || z.im.ctx() != ctx {
        return Err(Error::PrecisionMismatch {
            left: T::precision(ctx).to_string(),
            right: T::precision(z.re.ctx()).to_string(),
        });
    }
    Ok(())
}

pub(crate) fn same_ctx<T: Field>(a: T::Ctx, b: T::Ctx) -> Result<()> {
    if a != b {
        return Err(Error::PrecisionMismatch {
            left: T::precision(a).to_string(),
            right: T::precision(b).to_string(),
        });
    }
    Ok(())
}

impl<T: Field> Matrix<T> {
    /// Builds a matrix from row-major entries, validating shape and precision.
    pub fn new(rows: usize, cols: usize, ctx: T::Ctx, data: Vec<Complex<T>>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::dims(format!("empty {rows}x{cols} matrix")));
        }
        if data.len() != rows * cols {
            return Err(Error::dims(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        for z in &data {
            check_ctx(ctx, z)?;
        }
        Ok(Matrix {
            rows,
            cols,
            ctx,
            data,
        })
    }

    pub fn zeros(rows: usize, cols: usize, ctx: T::Ctx) -> Self {
        assert!(rows > 0 && cols > 0, "empty matrix");
        Matrix {
            rows,
            cols,
            ctx,
            data: vec![Complex::zero(ctx); rows * cols],
        }
    }

    pub fn identity(n: usize, ctx: T::Ctx) -> Self {
        let mut m = Matrix::zeros(n, n, ctx);
        for i in 0..n {
            m[(i, i)] = Complex::one(ctx);
        }
        m
    }

    pub fn from_fn(
        rows: usize,
        cols: usize,
        ctx: T::Ctx,
        mut f: impl FnMut(usize, usize) -> Complex<T>,
    ) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix {
            rows,
            cols,
            ctx,
            data,
        }
    }

    /// Real diagonal matrix.
    pub fn diagonal(values: &[T], ctx: T::Ctx) -> Self {
        let mut m = Matrix::zeros(values.len(), values.len(), ctx);
        for (i, v) in values.iter().enumerate() {
            m[(i, i)] = Complex::from_real(v.clone());
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn ctx(&self) -> T::Ctx {
        self.ctx
    }

    pub fn precision(&self) -> Precision {
        T::precision(self.ctx)
    }

    pub fn entries(&self) -> &[Complex<T>] {
        &self.data
    }

    pub fn into_entries(self) -> Vec<Complex<T>> {
        self.data
    }

    pub fn row(&self, i: usize) -> &[Complex<T>] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vector<T> {
        Vector::from_vec(self.ctx, (0..self.rows).map(|i| self[(i, j)].clone()).collect())
    }

    pub fn set_column(&mut self, j: usize, v: &Vector<T>) {
        for i in 0..self.rows {
            self[(i, j)] = v[i].clone();
        }
    }

    pub fn require_square(&self) -> Result<usize> {
        if !self.is_square() {
            return Err(Error::NotSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        Ok(self.rows)
    }

    pub fn transpose(&self) -> Self {
        Matrix::from_fn(self.cols, self.rows, self.ctx, |i, j| self[(j, i)].clone())
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Matrix::from_fn(self.cols, self.rows, self.ctx, |i, j| self[(j, i)].conj())
    }

    pub fn scale(&self, s: &Complex<T>) -> Self {
        let data = self
            .data
            .iter()
            .map(|z| {
                if z.is_zero() {
                    z.clone()
                } else {
                    z.clone() * s.clone()
                }
            })
            .collect();
        self.with_data(data)
    }

    fn with_data(&self, data: Vec<Complex<T>>) -> Self {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            ctx: self.ctx,
            data,
        }
    }

    pub fn neg(&self) -> Self {
        self.with_data(self.data.iter().map(|z| -z.clone()).collect())
    }

    fn zip_with(
        &self,
        other: &Self,
        f: impl Fn(&Complex<T>, &Complex<T>) -> Complex<T>,
    ) -> Result<Self> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::dims(format!(
                "{}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        same_ctx::<T>(self.ctx, other.ctx)?;
        Ok(self.with_data(
            self.data.iter().zip(&other.data).map(|(a, b)| f(a, b)).collect(),
        ))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a.clone() + b.clone())
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a.clone() - b.clone())
    }

    /// `z·I − self`.
    pub fn shifted_from(&self, z: &Complex<T>) -> Result<Self> {
        let n = self.require_square()?;
        let mut out = self.neg();
        for i in 0..n {
            out[(i, i)] += z.clone();
        }
        Ok(out)
    }

    /// Copies the `rows x cols` block starting at `(r0, c0)`.
    pub fn block(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> Self {
        Matrix::from_fn(rows, cols, self.ctx, |i, j| self[(r0 + i, c0 + j)].clone())
    }

    /// Assembles `[[a, b], [c, d]]`.
    pub fn from_blocks(a: &Self, b: &Self, c: &Self, d: &Self) -> Result<Self> {
        if a.rows != b.rows || c.rows != d.rows || a.cols != c.cols || b.cols != d.cols {
            return Err(Error::dims("inconsistent block shapes"));
        }
        for m in [b, c, d] {
            same_ctx::<T>(a.ctx, m.ctx)?;
        }
        let rows = a.rows + c.rows;
        let cols = a.cols + b.cols;
        Ok(Matrix::from_fn(rows, cols, a.ctx, |i, j| {
            let (blk_r, blk_c) = (i < a.rows, j < a.cols);
            match (blk_r, blk_c) {
                (true, true) => a[(i, j)].clone(),
                (true, false) => b[(i, j - a.cols)].clone(),
                (false, true) => c[(i - a.rows, j)].clone(),
                (false, false) => d[(i - a.rows, j - a.cols)].clone(),
            }
        }))
    }

    pub fn is_identity(&self) -> bool {
        self.is_square()
            && self.data.iter().enumerate().all(|(idx, z)| {
                let (i, j) = (idx / self.cols, idx % self.cols);
                if i == j {
                    z.im.is_zero() && z.re == T::one(self.ctx)
                } else {
                    z.is_zero()
                }
            })
    }

    pub fn nonzero_count(&self) -> usize {
        self.data.iter().filter(|z| !z.is_zero()).count()
    }

    /// Squared Frobenius norm (exact in the rational backend).
    pub fn frobenius_norm_sqr(&self) -> T {
        let mut acc = T::zero(self.ctx);
        for z in &self.data {
            acc.add_mul(&z.re, &z.re);
            acc.add_mul(&z.im, &z.im);
        }
        acc
    }

    /// `self · x`.
    pub fn mul_vec(&self, x: &Vector<T>) -> Result<Vector<T>> {
        if x.dim() != self.cols {
            return Err(Error::dims(format!(
                "{}x{} matrix times {}-vector",
                self.rows,
                self.cols,
                x.dim()
            )));
        }
        same_ctx::<T>(self.ctx, x.ctx())?;
        let mut out = Vec::with_capacity(self.rows);
        for i in 0..self.rows {
            let mut acc = Complex::zero(self.ctx);
            for (a, b) in self.row(i).iter().zip(x.as_slice()) {
                if !a.is_zero() && !b.is_zero() {
                    acc.add_mul(a, b);
                }
            }
            out.push(acc);
        }
        Ok(Vector::from_vec(self.ctx, out))
    }

    /// Converts every entry exactly (then rounds) into another backend.
    pub fn convert<U: Field>(&self, ctx: U::Ctx) -> Result<Matrix<U>> {
        let conv = |x: &T| -> Result<U> {
            x.to_rational()
                .map(|q| U::from_rational(&q, ctx))
                .ok_or_else(|| Error::invalid("non-finite matrix entry"))
        };
        let data = self
            .data
            .iter()
            .map(|z| Ok(Complex::new(conv(&z.re)?, conv(&z.im)?)))
            .collect::<Result<Vec<_>>>()?;
        Matrix::new(self.rows, self.cols, ctx, data)
    }

    /// Entries as `(re, im)` f64 pairs, row-major.
    pub fn to_f64_pairs(&self) -> Vec<(f64, f64)> {
        self.data.iter().map(Complex::to_f64_pair).collect()
    }
}

impl<T: FloatField> Matrix<T> {
    pub fn frobenius_norm(&self) -> T {
        self.frobenius_norm_sqr().sqrt()
    }

    /// Maximum absolute column sum.
    pub fn norm_1(&self) -> T {
        let mut best = T::zero(self.ctx);
        for j in 0..self.cols {
            let mut s = T::zero(self.ctx);
            for i in 0..self.rows {
                s += self[(i, j)].abs();
            }
            if s > best {
                best = s;
            }
        }
        best
    }

    /// Largest entrywise modulus of `self − other`.
    pub fn max_abs_diff(&self, other: &Self) -> Result<T> {
        let d = self.sub(other)?;
        let mut best = T::zero(self.ctx);
        for z in &d.data {
            let a = z.abs();
            if a > best {
                best = a;
            }
        }
        Ok(best)
    }
}

impl<T: Field> Index<(usize, usize)> for Matrix<T> {
    type Output = Complex<T>;
    fn index(&self, (i, j): (usize, usize)) -> &Complex<T> {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl<T: Field> IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex<T> {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl<T: Field> Vector<T> {
    pub fn new(ctx: T::Ctx, data: Vec<Complex<T>>) -> Result<Self> {
        if data.is_empty() {
            return Err(Error::dims("empty vector"));
        }
        for z in &data {
            check_ctx(ctx, z)?;
        }
        Ok(Vector { ctx, data })
    }

    pub(crate) fn from_vec(ctx: T::Ctx, data: Vec<Complex<T>>) -> Self {
        Vector { ctx, data }
    }

    pub fn zeros(dim: usize, ctx: T::Ctx) -> Self {
        Vector {
            ctx,
            data: vec![Complex::zero(ctx); dim],
        }
    }

    /// Unit basis vector `e_index` (0-based).
    pub fn basis(dim: usize, index: usize, ctx: T::Ctx) -> Self {
        let mut v = Vector::zeros(dim, ctx);
        v.data[index] = Complex::one(ctx);
        v
    }

    pub fn from_real(values: Vec<T>, ctx: T::Ctx) -> Self {
        Vector {
            ctx,
            data: values.into_iter().map(Complex::from_real).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.data.len()
    }

    pub fn ctx(&self) -> T::Ctx {
        self.ctx
    }

    pub fn as_slice(&self) -> &[Complex<T>] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<Complex<T>> {
        self.data
    }

    /// Sesquilinear product `⟨self|other⟩ = Σ conj(self_p) other_p`.
    pub fn braket(&self, other: &Self) -> Result<Complex<T>> {
        self.check_pair(other)?;
        let mut acc = Complex::zero(self.ctx);
        for (a, b) in self.data.iter().zip(&other.data) {
            if !a.is_zero() && !b.is_zero() {
                acc.add_conj_mul(a, b);
            }
        }
        Ok(acc)
    }

    /// Bilinear product `Σ self_p other_p` (row vector times column vector).
    pub fn dot(&self, other: &Self) -> Result<Complex<T>> {
        self.check_pair(other)?;
        let mut acc = Complex::zero(self.ctx);
        for (a, b) in self.data.iter().zip(&other.data) {
            if !a.is_zero() && !b.is_zero() {
                acc.add_mul(a, b);
            }
        }
        Ok(acc)
    }

    fn check_pair(&self, other: &Self) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::dims(format!(
                "vectors of dimension {} and {}",
                self.dim(),
                other.dim()
            )));
        }
        same_ctx::<T>(self.ctx, other.ctx)
    }

    pub fn norm_sqr(&self) -> T {
        let mut acc = T::zero(self.ctx);
        for z in &self.data {
            acc.add_mul(&z.re, &z.re);
            acc.add_mul(&z.im, &z.im);
        }
        acc
    }

    pub fn scale(&self, s: &Complex<T>) -> Self {
        Vector {
            ctx: self.ctx,
            data: self.data.iter().map(|z| z.clone() * s.clone()).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_pair(other)?;
        Ok(Vector {
            ctx: self.ctx,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a.clone() + b.clone())
                .collect(),
        })
    }

    pub fn convert<U: Field>(&self, ctx: U::Ctx) -> Result<Vector<U>> {
        let conv = |x: &T| -> Result<U> {
            x.to_rational()
                .map(|q| U::from_rational(&q, ctx))
                .ok_or_else(|| Error::invalid("non-finite vector component"))
        };
        let data = self
            .data
            .iter()
            .map(|z| Ok(Complex::new(conv(&z.re)?, conv(&z.im)?)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Vector { ctx, data })
    }
}

impl<T: FloatField> Vector<T> {
    pub fn norm(&self) -> T {
        self.norm_sqr().sqrt()
    }

    /// Scales to unit 2-norm; returns the previous norm.
    pub fn normalize(&mut self) -> T {
        let n = self.norm();
        if !n.is_zero() {
            for z in &mut self.data {
                *z = z.div_real(&n);
            }
        }
        n
    }
}

impl<T: Field> Index<usize> for Vector<T> {
    type Output = Complex<T>;
    fn index(&self, i: usize) -> &Complex<T> {
        &self.data[i]
    }
}

impl<T: Field> IndexMut<usize> for Vector<T> {
    fn index_mut(&mut self, i: usize) -> &mut Complex<T> {
        &mut self.data[i]
    }
}
