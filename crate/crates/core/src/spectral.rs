//! Closed-form eigensystems, condition numbers and the exact boom–bust
//! solution.
//!
//! Left eigenvectors are stored as rows `L_j` with `L_j·A = λ_j L_j`, and the
//! pairing `L_j·R_k` is the plain row-times-column product, so the left
//! matrix of a complete system is the inverse of the right one.

use rug::Rational;
use serde_json::{json, Value};

use crate::complex::Complex;
use crate::error::{Error, Result};
use crate::linalg::{mat_mul, singular_extremes, SvdOptions};
use crate::matrix::{Matrix, Vector};
use crate::models::{build_ehrenfest_h, Family, ModelSpec};
use crate::scalar::{Field, FloatField};

/// Eigenvalues with paired right (columns) and left (rows) eigenvectors.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenSystem<T: Field> {
    pub eigenvalues: Vec<Complex<T>>,
    /// Column `j` is `R_j`.
    pub right: Matrix<T>,
    /// Row `j` is `L_j`.
    pub left: Matrix<T>,
}

impl<T: Field> EigenSystem<T> {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn right_vector(&self, j: usize) -> Vector<T> {
        self.right.column(j)
    }

    pub fn left_vector(&self, j: usize) -> Vector<T> {
        Vector::from_vec(self.left.ctx(), self.left.row(j).to_vec())
    }

    /// The matrix of pairings `L_j·R_k`; the identity for a biorthonormal system.
    pub fn pairing_matrix(&self) -> Result<Matrix<T>> {
        mat_mul(&self.left, &self.right)
    }

    /// `Σ_j λ_jᵗ R_j L_j`, which equals `Aᵗ` for a complete system.
    pub fn spectral_power(&self, t: i64) -> Result<Matrix<T>> {
        let ctx = self.right.ctx();
        let scaled_right = Matrix::from_fn(self.right.rows(), self.len(), ctx, |i, j| {
            self.right[(i, j)].clone() * self.eigenvalues[j].powi(t)
        });
        mat_mul(&scaled_right, &self.left)
    }

    /// Applies `h` to every eigenvalue, keeping the eigenvectors.
    pub fn map_eigenvalues(self, h: impl Fn(&Complex<T>) -> Complex<T>) -> Self {
        EigenSystem {
            eigenvalues: self.eigenvalues.iter().map(h).collect(),
            ..self
        }
    }

    pub fn convert<U: Field>(&self, ctx: U::Ctx) -> Result<EigenSystem<U>> {
        let eigenvalues = Vector::from_vec(self.right.ctx(), self.eigenvalues.clone())
            .convert::<U>(ctx)?
            .into_vec();
        Ok(EigenSystem {
            eigenvalues,
            right: self.right.convert(ctx)?,
            left: self.left.convert(ctx)?,
        })
    }

    /// Scales every left vector so its pairing with the matching right vector is 1.
    fn normalize_left(&mut self) -> Result<()> {
        for j in 0..self.len() {
            let pairing = self.left_vector(j).dot(&self.right_vector(j))?;
            if pairing.is_zero() {
                continue;
            }
            for c in 0..self.left.cols() {
                let z = self.left[(j, c)].clone() / pairing.clone();
                self.left[(j, c)] = z;
            }
        }
        Ok(())
    }
}

impl<T: FloatField> EigenSystem<T> {
    /// `ρ = max_j |λ_j|`.
    pub fn spectral_radius(&self) -> T {
        let ctx = self.right.ctx();
        self.eigenvalues
            .iter()
            .map(Complex::abs)
            .fold(T::zero(ctx), T::max_of)
    }

    /// `κ_j = ‖R_j‖₂‖L_j‖₂/|L_j·R_j|`; infinite when the pairing vanishes.
    pub fn condition_numbers(&self) -> Result<Vec<T>> {
        condition_numbers(self)
    }

    /// Largest `‖A R_j − λ_j R_j‖/‖R_j‖` over the system.
    pub fn max_residual(&self, a: &Matrix<T>) -> Result<T> {
        let ctx = a.ctx();
        let mut worst = T::zero(ctx);
        for j in 0..self.len() {
            let r = self.right_vector(j);
            let ar = a.mul_vec(&r)?;
            let lr = r.scale(&self.eigenvalues[j]);
            let diff = ar.add(&lr.scale(&-Complex::one(ctx)))?;
            worst = T::max_of(worst, diff.norm() / r.norm());
        }
        Ok(worst)
    }

    pub fn to_json(&self) -> Result<Value> {
        let pair = |z: &Complex<T>| json!([z.re.to_exact_string(), z.im.to_exact_string()]);
        let kappa: Vec<String> = self
            .condition_numbers()?
            .iter()
            .map(|k| k.to_exact_string())
            .collect();
        Ok(json!({
            "precision": self.right.precision().to_string(),
            "eigenvalues": self.eigenvalues.iter().map(pair).collect::<Vec<_>>(),
            "condition_numbers": kappa,
            "spectral_radius": self.spectral_radius().to_exact_string(),
            "right_vectors": serde_json::from_str::<Value>(&crate::io::matrix_to_json(&self.right)?)?,
            "left_vectors": serde_json::from_str::<Value>(&crate::io::matrix_to_json(&self.left)?)?,
        }))
    }
}

/// `κ_j = ‖R_j‖₂‖L_j‖₂/|L_j·R_j|`; infinite when the pairing vanishes.
pub fn condition_numbers<T: FloatField>(es: &EigenSystem<T>) -> Result<Vec<T>> {
    let ctx = es.right.ctx();
    (0..es.len())
        .map(|j| {
            let r = es.right_vector(j);
            let l = es.left_vector(j);
            let pairing = l.dot(&r)?.abs();
            if pairing.is_zero() {
                return Ok(T::infinity(ctx));
            }
            Ok(r.norm() * l.norm() / pairing)
        })
        .collect()
}

/// `κ(V) = s_max(V)/s_min(V)` for the matrix `V` of right eigenvectors.
pub fn eigenvector_matrix_condition<T: FloatField>(
    es: &EigenSystem<T>,
    opts: &SvdOptions,
) -> Result<T> {
    let (smax, smin) = singular_extremes(&es.right, opts)?;
    if smin.is_zero() {
        return Ok(T::infinity(es.right.ctx()));
    }
    Ok(smax / smin)
}

fn angle<T: FloatField>(k: i64, m: usize, ctx: T::Ctx) -> T {
    T::pi(ctx) * T::from_i64(k, ctx) / T::from_i64(m as i64 + 1, ctx)
}

/// Eigensystem of the `m × m` Toeplitz block:
/// `μ_k = 2cos(kπ/(m+1))`, `r_j = g^j sin(kπj/(m+1))`,
/// `l_j = 2/(m+1)·g^{−j} sin(kπj/(m+1))` for `k, j = 1..m`.
pub fn eigen_b<T: FloatField>(m: usize, g: &T) -> Result<EigenSystem<T>> {
    if m == 0 {
        return Err(Error::invalid("Toeplitz size must be at least 1"));
    }
    if *g <= T::zero(g.ctx()) {
        return Err(Error::invalid("g must be positive"));
    }
    let ctx = g.ctx();
    let two = T::from_i64(2, ctx);
    let norm = two.clone() / T::from_i64(m as i64 + 1, ctx);
    let g_pow: Vec<T> = (1..=m as i64).map(|j| g.powi(j)).collect();
    let mut right = Matrix::zeros(m, m, ctx);
    let mut left = Matrix::zeros(m, m, ctx);
    let mut eigenvalues = Vec::with_capacity(m);
    for k in 1..=m {
        let theta = angle::<T>(k as i64, m, ctx);
        eigenvalues.push(Complex::from_real(two.clone() * theta.cos()));
        for j in 1..=m {
            let s = (theta.clone() * T::from_i64(j as i64, ctx)).sin();
            right[(j - 1, k - 1)] = Complex::from_real(g_pow[j - 1].clone() * s.clone());
            left[(k - 1, j - 1)] = Complex::from_real(norm.clone() * s / g_pow[j - 1].clone());
        }
    }
    Ok(EigenSystem {
        eigenvalues,
        right,
        left,
    })
}

/// Eigensystem of the `n × n` block matrix.
///
/// Each `μ_k` of the Toeplitz block splits into `λ_{±k} = e^{±ikπ/(M+1)}`
/// (the roots of `λ² − μ_kλ + 1 = 0`) with `R^{(±k)} = (r, −λ_∓ r)` and
/// `L^{(±k)} = (l, λ_∓ l)/(1 − λ_∓²)`, then each `L` is rescaled by its
/// computed pairing. Eigenvalues are ordered `λ_{+1}, λ_{−1}, λ_{+2}, …`.
pub fn eigen_a<T: FloatField>(n: usize, g: &T) -> Result<EigenSystem<T>> {
    if n < 2 || n % 2 != 0 {
        return Err(Error::invalid(format!("block-transfer needs an even n >= 2, got {n}")));
    }
    let m = n / 2;
    let ctx = g.ctx();
    let b = eigen_b(m, g)?;
    let mut right = Matrix::zeros(n, n, ctx);
    let mut left = Matrix::zeros(n, n, ctx);
    let mut eigenvalues = Vec::with_capacity(n);
    let one = Complex::one(ctx);
    for k in 0..m {
        let theta = angle::<T>(k as i64 + 1, m, ctx);
        for sign in [1i64, -1] {
            let col = eigenvalues.len();
            let lambda = Complex::cis(&(theta.clone() * T::from_i64(sign, ctx)));
            let lambda_conj = lambda.conj();
            let prefactor = one.clone() / (one.clone() - lambda_conj.clone() * lambda_conj.clone());
            for j in 0..m {
                let r = b.right[(j, k)].clone();
                right[(j, col)] = r.clone();
                right[(m + j, col)] = -(lambda_conj.clone() * r);
                let l = b.left[(k, j)].clone();
                left[(col, j)] = l.clone() * prefactor.clone();
                left[(col, m + j)] = lambda_conj.clone() * l * prefactor.clone();
            }
            eigenvalues.push(lambda);
        }
    }
    let mut es = EigenSystem {
        eigenvalues,
        right,
        left,
    };
    es.normalize_left()?;
    Ok(es)
}

/// Eigensystem of the tilted Pauli matrix: `λ = ±1`, `R = (g, ±1)`,
/// `L = (1/g, ±1)/2`.
pub fn eigen_tilted_pauli<T: FloatField>(g: &T) -> Result<EigenSystem<T>> {
    if *g <= T::zero(g.ctx()) {
        return Err(Error::invalid("g must be positive"));
    }
    let ctx = g.ctx();
    let half = T::one(ctx) / T::from_i64(2, ctx);
    let re = |x: T| Complex::from_real(x);
    let right = Matrix::new(
        2,
        2,
        ctx,
        vec![re(g.clone()), re(g.clone()), re(T::one(ctx)), re(-T::one(ctx))],
    )?;
    let inv_g = half.clone() / g.clone();
    let left = Matrix::new(
        2,
        2,
        ctx,
        vec![re(inv_g.clone()), re(half.clone()), re(inv_g), re(-half)],
    )?;
    Ok(EigenSystem {
        eigenvalues: vec![Complex::one(ctx), Complex::from_i64(-1, ctx)],
        right,
        left,
    })
}

/// Spectrum of the `n × n` Ehrenfest matrix: `−(n−1), −(n−3), …, n−1`.
pub fn ehrenfest_spectrum(n: usize) -> Vec<i64> {
    (0..n as i64).map(|k| 2 * k - (n as i64 - 1)).collect()
}

/// Exact eigensystem of the Ehrenfest matrix `H`.
///
/// `H` is tridiagonal with nonzero off-diagonals, so each eigenvector follows
/// from a three-term recurrence in exact rational arithmetic.
pub fn eigen_ehrenfest(n: usize) -> Result<EigenSystem<Rational>> {
    let h = build_ehrenfest_h(n)?;
    let spectrum = ehrenfest_spectrum(n);
    let mut right = Matrix::zeros(n, n, ());
    let mut left = Matrix::zeros(n, n, ());
    for (col, &lam) in spectrum.iter().enumerate() {
        let lam = Rational::from(lam);
        let mut x = vec![Rational::new(); n];
        let mut y = vec![Rational::new(); n];
        x[0] = Rational::from(1);
        y[0] = Rational::from(1);
        for i in 0..n - 1 {
            let mut xi = Rational::from(&lam * &x[i]);
            let mut yi = Rational::from(&lam * &y[i]);
            if i > 0 {
                xi -= Rational::from(&h[(i, i - 1)].re * &x[i - 1]);
                yi -= Rational::from(&h[(i - 1, i)].re * &y[i - 1]);
            }
            x[i + 1] = xi / &h[(i, i + 1)].re;
            y[i + 1] = yi / &h[(i + 1, i)].re;
        }
        for i in 0..n {
            right[(i, col)] = Complex::from_real(x[i].clone());
            left[(col, i)] = Complex::from_real(y[i].clone());
        }
    }
    let mut es = EigenSystem {
        eigenvalues: spectrum.iter().map(|&l| Complex::from_i64(l, ())).collect(),
        right,
        left,
    };
    es.normalize_left()?;
    Ok(es)
}

/// Analytic eigensystem of a model: `A` for block-transfer, `B` for
/// toeplitz-b, `X` for tilted-pauli and the generator `H` for ehrenfest.
pub fn analytic_eigensystem<T: FloatField>(spec: &ModelSpec, ctx: T::Ctx) -> Result<EigenSystem<T>> {
    spec.validate(T::precision(ctx))?;
    let n = spec.n.unwrap_or(2);
    match spec.family()? {
        Family::BlockTransfer => eigen_a(n, &spec.g().to_field::<T>(ctx)),
        Family::ToeplitzB => eigen_b(n, &spec.g().to_field::<T>(ctx)),
        Family::TiltedPauli => eigen_tilted_pauli(&spec.g().to_field::<T>(ctx)),
        Family::Ehrenfest => eigen_ehrenfest(n)?.convert(ctx),
        other => Err(Error::invalid(format!(
            "no analytic spectrum for the {other} family"
        ))),
    }
}

/// Closed form of `Σ_{k=−M}^{M} e^{ikπx/(M+1)}`: `2M+1` when `x` is a
/// multiple of `2(M+1)`, otherwise `(−1)^{x+1}`.
pub fn dirichlet_kernel(m: u64, x: i64) -> i64 {
    let period = 2 * (m as i64 + 1);
    if x.rem_euclid(period) == 0 {
        2 * m as i64 + 1
    } else if x.rem_euclid(2) == 0 {
        -1
    } else {
        1
    }
}

/// Fourier coefficients `c_k`, `k = −M..M`, of the special-vector series
/// `f(t) = Σ_k c_k e^{ikπt/(M+1)}`.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierCoefficients<T: Field> {
    pub m: usize,
    pub g: T,
    /// `c[k + M]` holds `c_k`.
    pub c: Vec<Complex<T>>,
}

impl<T: FloatField> FourierCoefficients<T> {
    /// `c_k = i/(g(M+1)) · (−1)^k (1 − e^{iθ})((−1)^k − g^{M+1}) sin θ / (g + 1/g − 2cos θ)`
    /// with `θ = πk/(M+1)`.
    pub fn new(m: usize, g: &T) -> Result<Self> {
        if m == 0 {
            return Err(Error::invalid("M must be at least 1"));
        }
        if *g <= T::zero(g.ctx()) {
            return Err(Error::invalid("g must be positive"));
        }
        let ctx = g.ctx();
        let one = T::one(ctx);
        let g_top = g.powi(m as i64 + 1);
        let prefactor = Complex::new(T::zero(ctx), one.clone() / (g.clone() * T::from_i64(m as i64 + 1, ctx)));
        let denom_base = g.clone() + one.clone() / g.clone();
        let mut c = Vec::with_capacity(2 * m + 1);
        for k in -(m as i64)..=(m as i64) {
            if k == 0 {
                c.push(Complex::zero(ctx));
                continue;
            }
            let theta = angle::<T>(k, m, ctx);
            let parity = if k % 2 == 0 { one.clone() } else { -one.clone() };
            let one_minus = Complex::one(ctx) - Complex::cis(&theta);
            let diff = parity.clone() - g_top.clone();
            let ratio = theta.sin() / (denom_base.clone() - T::from_i64(2, ctx) * theta.cos());
            let real_part = parity * diff * ratio;
            c.push(prefactor.clone() * one_minus.scale(&real_part));
        }
        Ok(FourierCoefficients {
            m,
            g: g.clone(),
            c,
        })
    }

    pub fn get(&self, k: i64) -> &Complex<T> {
        &self.c[(k + self.m as i64) as usize]
    }

    pub fn max_abs(&self) -> T {
        let ctx = self.g.ctx();
        self.c.iter().map(Complex::abs).fold(T::zero(ctx), T::max_of)
    }

    /// `Σ_k c_k e^{ikπt/(M+1)}`.
    pub fn evaluate(&self, t: i64) -> Complex<T> {
        let ctx = self.g.ctx();
        let mut acc = Complex::zero(ctx);
        for k in -(self.m as i64)..=(self.m as i64) {
            let phase = Complex::cis(&angle::<T>(k * t, self.m, ctx));
            acc.add_mul(self.get(k), &phase);
        }
        acc
    }
}

/// Exact `f(t) = ⟨w|Aᵗ|v⟩` for `w` all ones and `v = e₁`, with `M = n/2`
/// and `t' = t mod (n+2)`:
///
/// | `t'` | `f` |
/// |---|---|
/// | `0` | `1` |
/// | `0 < t' < M` | `(g−1)g^{t'−1}` |
/// | `M`, `M+1` | `−g^{M−1}` |
/// | `M+1 < t' ≤ 2M` | `(g−1)g^{2(M+1)}g^{−t'−2}` |
/// | `2M+1` | `1` |
pub fn closed_form_f<T: Field>(n: usize, g: &T, t: u64) -> Result<T> {
    if n < 2 || n % 2 != 0 {
        return Err(Error::invalid(format!("closed form needs an even n >= 2, got {n}")));
    }
    let m = (n / 2) as u64;
    let ctx = g.ctx();
    let one = T::one(ctx);
    let tp = t % (n as u64 + 2);
    Ok(if tp == 0 || tp == 2 * m + 1 {
        one
    } else if tp < m {
        (g.clone() - one) * g.powi(tp as i64 - 1)
    } else if tp <= m + 1 {
        -g.powi(m as i64 - 1)
    } else {
        (g.clone() - one) * g.powi(2 * m as i64 - tp as i64)
    })
}
