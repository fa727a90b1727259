use crate::complex::Complex;
use crate::error::{Error, Result};
use crate::matrix::{Matrix, Vector};
use crate::scalar::FloatField;

use super::lu::LuFactors;

/// Controls for the iterative extreme-singular-value solvers.
#[derive(Debug, Clone, PartialEq)]
pub struct SvdOptions {
    /// Iteration cap for power and inverse iteration.
    pub max_iterations: usize,
    /// Relative stopping tolerance; `None` picks one from the backend width.
    pub rel_tol: Option<f64>,
    /// Largest dimension for which a full Jacobi SVD is used as fallback.
    pub fallback_max_dim: usize,
}

impl Default for SvdOptions {
    fn default() -> Self {
        SvdOptions {
            max_iterations: 500,
            rel_tol: None,
            fallback_max_dim: 500,
        }
    }
}

impl SvdOptions {
    fn tolerance<T: FloatField>(&self, ctx: T::Ctx) -> f64 {
        self.rel_tol.unwrap_or_else(|| {
            let bits = T::mantissa_bits(ctx);
            if bits <= 53 {
                1e-13
            } else {
                2f64.powi(-((bits / 2).min(100) as i32))
            }
        })
    }
}

/// Deterministic start vector with no special alignment to any structure.
fn start_vector<T: FloatField>(n: usize, ctx: T::Ctx) -> Vector<T> {
    let data = (0..n)
        .map(|i| {
            let k = i as f64;
            let mag = 1.0 + 0.5 * ((k * 0.618_033_988_749_895).fract());
            let phase = k * 2.399_963_229_728_653;
            Complex::from_f64_pair(mag * phase.cos(), mag * phase.sin(), ctx)
        })
        .collect();
    let mut v = Vector::new(ctx, data).expect("non-empty start vector");
    v.normalize();
    v
}

/// Tracks a monotone scalar sequence and decides convergence from its
/// geometric rate: with successive relative differences `d` and ratio `r`,
/// the remaining relative error is about `d·r/(1−r)`. Differences are formed
/// in the working precision, so tolerances below double resolution work.
struct Convergence<T> {
    prev: Option<T>,
    prev_delta: Option<f64>,
}

impl<T: FloatField> Convergence<T> {
    fn new() -> Self {
        Convergence {
            prev: None,
            prev_delta: None,
        }
    }

    fn update(&mut self, value: &T, tol: f64) -> bool {
        let done = match self.prev.take() {
            None => false,
            Some(p) => {
                let delta = ((value.clone() - p).log2_abs() - value.log2_abs()).exp2();
                let converged = if delta == 0.0 {
                    true
                } else if let Some(pd) = self.prev_delta {
                    let r = delta / pd;
                    r < 1.0 && delta * r / (1.0 - r) <= tol
                } else {
                    false
                };
                self.prev_delta = Some(delta);
                converged
            }
        };
        self.prev = Some(value.clone());
        done
    }
}

fn adjoint_mul_vec<T: FloatField>(a: &Matrix<T>, y: &Vector<T>) -> Vector<T> {
    let n = a.cols();
    let mut out = vec![Complex::zero(a.ctx()); n];
    for i in 0..a.rows() {
        let yi = &y[i];
        if yi.is_zero() {
            continue;
        }
        for (o, aij) in out.iter_mut().zip(a.row(i)) {
            if !aij.is_zero() {
                o.add_conj_mul(aij, yi);
            }
        }
    }
    Vector::new(a.ctx(), out).expect("non-empty")
}

fn power_iteration<T: FloatField>(a: &Matrix<T>, opts: &SvdOptions) -> Result<T> {
    let ctx = a.ctx();
    if a.frobenius_norm_sqr().is_zero() {
        return Ok(T::zero(ctx));
    }
    let tol = opts.tolerance::<T>(ctx);
    let mut x = start_vector::<T>(a.cols(), ctx);
    let mut conv = Convergence::new();
    for _ in 0..opts.max_iterations {
        let y = a.mul_vec(&x)?;
        // Rayleigh quotient of a†a at unit x.
        let s = y.norm();
        let mut z = adjoint_mul_vec(a, &y);
        if z.normalize().is_zero() {
            return Ok(s);
        }
        x = z;
        if conv.update(&s, tol) {
            return Ok(s);
        }
    }
    Err(Error::NonConvergence {
        what: "largest singular value",
        iterations: opts.max_iterations,
    })
}

/// Smallest right singular vector in double precision, iterated until the
/// direction stops moving. `None` when the matrix does not fit in doubles or
/// the iteration breaks down.
fn machine_singular_vector(a: &Matrix<f64>, max_iterations: usize) -> Option<Vector<f64>> {
    let lu = LuFactors::factor(a).ok()?;
    let floor = 8.0 * f64::EPSILON * (a.cols() as f64).sqrt();
    let mut x = start_vector::<f64>(a.cols(), ()).into_vec();
    let mut prev_step = f64::INFINITY;
    for _ in 0..max_iterations {
        let mut z = lu.solve(&lu.solve_adjoint(&x));
        let norm = z.iter().map(Complex::norm_sqr).sum::<f64>().sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return None;
        }
        // Remove the arbitrary phase so successive iterates are comparable.
        let (mut pr, mut pi) = (0.0, 0.0);
        for (xi, zi) in x.iter().zip(&z) {
            pr += xi.re * zi.re + xi.im * zi.im;
            pi += xi.re * zi.im - xi.im * zi.re;
        }
        let pa = pr.hypot(pi);
        let (cr, ci) = if pa > 0.0 { (pr / pa, pi / pa) } else { (1.0, 0.0) };
        let mut step = 0.0;
        for (zi, xi) in z.iter_mut().zip(&x) {
            let (r, i) = (zi.re / norm, zi.im / norm);
            *zi = Complex::new(r * cr + i * ci, i * cr - r * ci);
            step += (zi.re - xi.re).powi(2) + (zi.im - xi.im).powi(2);
        }
        let step = step.sqrt();
        x = z;
        if step <= floor || (step >= prev_step && step < 1e-6) {
            break;
        }
        prev_step = step;
    }
    Vector::new((), x).ok()
}

/// Lanczos start vector: the double-precision singular vector
/// when the backend is wider, so the Rayleigh quotient starts near its limit.
fn inverse_start<T: FloatField>(a: &Matrix<T>, opts: &SvdOptions) -> Vector<T> {
    let ctx = a.ctx();
    let warm = if T::mantissa_bits(ctx) > 53 {
        a.convert::<f64>(())
            .ok()
            .and_then(|m| machine_singular_vector(&m, opts.max_iterations))
            .and_then(|v| v.convert::<T>(ctx).ok())
    } else {
        None
    };
    match warm {
        Some(mut v) => {
            v.normalize();
            v
        }
        None => start_vector::<T>(a.cols(), ctx),
    }
}

fn braket_slices<T: FloatField>(x: &[Complex<T>], y: &[Complex<T>], ctx: T::Ctx) -> Complex<T> {
    let mut acc = Complex::zero(ctx);
    for (a, b) in x.iter().zip(y) {
        acc.add_conj_mul(a, b);
    }
    acc
}

/// Largest eigenvalue of the real symmetric tridiagonal matrix with diagonal
/// `diag` and off-diagonal `off`, by Sturm-sequence bisection.
fn top_tridiagonal_eigenvalue<T: FloatField>(diag: &[T], off: &[T], floor: &T, rel_tol: f64) -> T {
    let ctx = floor.ctx();
    let k = diag.len();
    if k == 1 {
        return diag[0].clone();
    }
    let mut lo = floor.clone();
    let mut hi = floor.clone();
    for i in 0..k {
        lo = T::max_of(lo, diag[i].clone());
        let mut radius = diag[i].clone();
        if i > 0 {
            radius += off[i - 1].abs();
        }
        if i + 1 < k {
            radius += off[i].abs();
        }
        hi = T::max_of(hi, radius);
    }
    let eps = T::epsilon(ctx);
    // Number of eigenvalues below `x`, from the signs of the LDLᵀ pivots.
    let below = |x: &T| -> usize {
        let mut count = 0;
        let mut d = T::one(ctx);
        for i in 0..k {
            d = if i == 0 {
                diag[0].clone() - x.clone()
            } else {
                let b = off[i - 1].clone();
                diag[i].clone() - x.clone() - b.clone() * b / d
            };
            if d.is_zero() {
                d = eps.clone() * (x.abs() + T::one(ctx));
            }
            if d < T::zero(ctx) {
                count += 1;
            }
        }
        count
    };
    let rel = T::from_f64(rel_tol, ctx);
    let two = T::from_i64(2, ctx);
    while hi.clone() - lo.clone() > rel.clone() * hi.abs() {
        let mid = (lo.clone() + hi.clone()) / two.clone();
        if mid <= lo || mid >= hi {
            break;
        }
        if below(&mid) == k {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    (lo + hi) / two
}

/// Largest eigenvalue of `(a†a)^{-1}` by Lanczos with full
/// reorthogonalization, applied through one LU factorization. Clustered
/// small singular values, where plain inverse iteration crawls, converge
/// at the Chebyshev rate.
fn inverse_lanczos<T: FloatField>(a: &Matrix<T>, opts: &SvdOptions) -> Result<T> {
    let ctx = a.ctx();
    let n = a.cols();
    let lu = LuFactors::factor(a)?;
    let tol = opts.tolerance::<T>(ctx);
    let eps = T::epsilon(ctx);
    let bisection_tol = (tol * 1e-3).max(4.0 * eps.to_f64());
    let mut basis = vec![inverse_start(a, opts).into_vec()];
    let mut diag: Vec<T> = Vec::new();
    let mut off: Vec<T> = Vec::new();
    let mut theta = T::zero(ctx);
    let mut quiet_steps = 0;
    for k in 0..opts.max_iterations.min(n) {
        let mut w = lu.solve(&lu.solve_adjoint(&basis[k]));
        diag.push(braket_slices(&basis[k], &w, ctx).re);
        for _ in 0..2 {
            for q in &basis {
                let c = braket_slices(q, &w, ctx);
                for (wi, qi) in w.iter_mut().zip(q) {
                    wi.add_mul(&-c.clone(), qi);
                }
            }
        }
        let beta = w.iter().map(Complex::norm_sqr).fold(T::zero(ctx), |acc, x| acc + x).sqrt();
        let next = top_tridiagonal_eigenvalue(&diag, &off, &theta, bisection_tol);
        // Ritz values increase monotonically; stop after two negligible steps.
        let step = ((next.clone() - theta.clone()).log2_abs() - next.log2_abs()).exp2();
        quiet_steps = if step <= tol { quiet_steps + 1 } else { 0 };
        theta = next;
        let invariant = beta <= theta.clone() * eps.clone() * T::from_i64(16, ctx);
        if k + 1 == n || invariant || quiet_steps >= 2 {
            return Ok(T::one(ctx) / theta.sqrt());
        }
        for wi in w.iter_mut() {
            *wi = wi.div_real(&beta);
        }
        off.push(beta);
        basis.push(w);
    }
    Err(Error::NonConvergence {
        what: "smallest singular value",
        iterations: opts.max_iterations,
    })
}

fn fallback_allowed<T: FloatField>(a: &Matrix<T>, opts: &SvdOptions) -> bool {
    a.rows() <= opts.fallback_max_dim
}

/// Largest singular value by power iteration on `a†a`, falling back to a
/// full Jacobi SVD for small matrices when the iteration stalls.
pub fn largest_singular_value<T: FloatField>(a: &Matrix<T>, opts: &SvdOptions) -> Result<T> {
    a.require_square()?;
    match power_iteration(a, opts) {
        Err(Error::NonConvergence { .. }) if fallback_allowed(a, opts) => {
            let s = jacobi_singular_values(a)?;
            Ok(s[0].clone())
        }
        other => other,
    }
}

/// Smallest singular value by Lanczos on `(a†a)^{-1}` through one LU
/// factorization, started from the double-precision singular vector in wider
/// backends. Numerically singular or stalling inputs fall back to a full
/// Jacobi SVD for small matrices.
pub fn smallest_singular_value<T: FloatField>(a: &Matrix<T>, opts: &SvdOptions) -> Result<T> {
    a.require_square()?;
    match inverse_lanczos(a, opts) {
        Err(Error::NonConvergence { .. } | Error::Singular { .. })
            if fallback_allowed(a, opts) =>
        {
            let s = jacobi_singular_values(a)?;
            Ok(s.last().expect("non-empty").clone())
        }
        other => other,
    }
}

/// `(s_max, s_min)` of a square matrix.
pub fn singular_extremes<T: FloatField>(a: &Matrix<T>, opts: &SvdOptions) -> Result<(T, T)> {
    let smax = largest_singular_value(a, opts)?;
    let smin = smallest_singular_value(a, opts)?;
    Ok((smax, smin))
}

/// All singular values in decreasing order by one-sided complex Jacobi.
pub fn jacobi_singular_values<T: FloatField>(a: &Matrix<T>) -> Result<Vec<T>> {
    const MAX_SWEEPS: usize = 80;
    let ctx = a.ctx();
    let (m, n) = (a.rows(), a.cols());
    let mut cols: Vec<Vec<Complex<T>>> = (0..n).map(|j| a.column(j).into_vec()).collect();
    let eps = T::epsilon(ctx) * T::from_i64(m as i64, ctx);
    let eps_sq = eps.clone() * eps;
    let one = T::one(ctx);
    let col_norm_sqr = |c: &[Complex<T>]| {
        let mut acc = T::zero(ctx);
        for z in c {
            acc.add_mul(&z.re, &z.re);
            acc.add_mul(&z.im, &z.im);
        }
        acc
    };
    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha = col_norm_sqr(&cols[p]);
                let beta = col_norm_sqr(&cols[q]);
                if alpha.is_zero() || beta.is_zero() {
                    continue;
                }
                let mut gamma = Complex::zero(ctx);
                for (x, y) in cols[p].iter().zip(&cols[q]) {
                    gamma.add_conj_mul(x, y);
                }
                let g_sq = gamma.norm_sqr();
                if g_sq <= eps_sq.clone() * alpha.clone() * beta.clone() {
                    continue;
                }
                rotated = true;
                let g_abs = g_sq.sqrt();
                let phase = gamma.div_real(&g_abs).conj();
                let two = T::from_i64(2, ctx);
                let zeta = (beta - alpha) / (two * g_abs);
                let root = (one.clone() + zeta.clone() * zeta.clone()).sqrt();
                let mut t = one.clone() / (zeta.abs() + root);
                if zeta < T::zero(ctx) {
                    t = -t;
                }
                let c = one.clone() / (one.clone() + t.clone() * t.clone()).sqrt();
                let s = c.clone() * t;
                let (left, right) = cols.split_at_mut(q);
                let (cp, cq) = (&mut left[p], &mut right[0]);
                for (xp, xq) in cp.iter_mut().zip(cq.iter_mut()) {
                    let tq = xq.clone() * phase.clone();
                    let np = xp.scale(&c) - tq.scale(&s);
                    let nq = xp.scale(&s) + tq.scale(&c);
                    *xp = np;
                    *xq = nq;
                }
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NonConvergence {
            what: "Jacobi SVD",
            iterations: MAX_SWEEPS,
        });
    }
    let mut values: Vec<T> = cols.iter().map(|c| col_norm_sqr(c).sqrt()).collect();
    values.sort_by(|x, y| y.partial_cmp(x).unwrap_or(std::cmp::Ordering::Equal));
    Ok(values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{build_block_a, build_tilted_pauli};
    use proptest::prelude::*;
    use rug::{Float, Rational};

    fn opts() -> SvdOptions {
        SvdOptions::default()
    }

    #[test]
    fn tilted_pauli_singular_values() {
        let x = build_tilted_pauli(&Rational::from(2)).unwrap();
        let xf = x.convert::<f64>(()).unwrap();
        let (smax, smin) = singular_extremes(&xf, &opts()).unwrap();
        assert!((smax - 2.0).abs() < 1e-12);
        assert!((smin - 0.5).abs() < 1e-12);
        let xb = x.convert::<Float>(256).unwrap();
        let (smax, smin) = singular_extremes(&xb, &opts()).unwrap();
        assert!((smax - 2u32).abs() < 1e-25);
        assert!((smin - 0.5f64).abs() < 1e-25);
    }

    #[test]
    fn identity_has_unit_singular_values() {
        let id = Matrix::<f64>::identity(5, ());
        let (smax, smin) = singular_extremes(&id, &opts()).unwrap();
        assert!((smax - 1.0).abs() <= 4.0 * f64::EPSILON && (smin - 1.0).abs() <= 4.0 * f64::EPSILON, "{smax} {smin}");
    }

    #[test]
    fn zero_matrix_and_singular_input() {
        let z = Matrix::<f64>::zeros(3, 3, ());
        assert_eq!(largest_singular_value(&z, &opts()).unwrap(), 0.0);
        assert_eq!(smallest_singular_value(&z, &opts()).unwrap(), 0.0);
        let no_fallback = SvdOptions {
            fallback_max_dim: 0,
            ..opts()
        };
        assert!(matches!(
            smallest_singular_value(&z, &no_fallback),
            Err(Error::Singular { .. })
        ));
    }

    #[test]
    fn iteration_cap_is_reported() {
        let a = build_block_a(20, &Rational::from(2)).unwrap();
        let shifted = a
            .convert::<f64>(())
            .unwrap()
            .shifted_from(&Complex::from_real(1.5))
            .unwrap();
        let capped = SvdOptions {
            max_iterations: 2,
            fallback_max_dim: 0,
            ..opts()
        };
        assert!(matches!(
            largest_singular_value(&shifted, &capped),
            Err(Error::NonConvergence { .. })
        ));
    }

    #[test]
    fn shifted_block_matrix_at_g_matches_full_svd() {
        // Oracle: 200-bit full SVD of 2I - A(40, 2).
        let g = Rational::from(2);
        let a = build_block_a(40, &g).unwrap().convert::<Float>(256).unwrap();
        let shifted = a.shifted_from(&Complex::from_i64(2, 256)).unwrap();
        let smin = smallest_singular_value(&shifted, &opts()).unwrap();
        assert!((smin.to_f64() - 0.0967).abs() < 5e-4, "s_min = {smin}");
    }

    #[test]
    fn iterative_and_jacobi_agree() {
        let a = build_block_a(12, &Rational::from((3, 2))).unwrap();
        let af = a.convert::<Float>(128).unwrap();
        let shifted = af.shifted_from(&Complex::new(Float::with_val(128, 0.3), Float::with_val(128, 0.9))).unwrap();
        let all = jacobi_singular_values(&shifted).unwrap();
        let (smax, smin) = singular_extremes(&shifted, &opts()).unwrap();
        let rel = |x: &Float, y: &Float| (x.clone() - y).abs() / y.clone();
        assert!(rel(&smax, &all[0]) < 1e-10f64);
        assert!(rel(&smin, all.last().unwrap()) < 1e-10f64);
    }

    #[test]
    fn wide_backend_reaches_its_own_tolerance() {
        // Clustered small singular values: cold inverse iteration converges slowly here.
        let a = build_block_a(24, &Rational::from(2)).unwrap().convert::<Float>(192).unwrap();
        for (re, im) in [(0.3, 0.2), (-2.5, 1.0), (0.0, 2.9)] {
            let z = Complex::new(Float::with_val(192, re), Float::with_val(192, im));
            let shifted = a.shifted_from(&z).unwrap();
            let reference = jacobi_singular_values(&shifted).unwrap().pop().unwrap();
            let smin = smallest_singular_value(&shifted, &opts()).unwrap();
            let rel = ((smin - &reference).abs() / reference).to_f64();
            assert!(rel < 1e-25, "z = ({re}, {im}): relative error {rel:e}");
        }
    }

    #[test]
    fn clustered_singular_values_converge() {
        let u = crate::models::ModelSpec::ehrenfest(20).evolution_matrix::<Float>(160).unwrap();
        for (re, im) in [(6.0, 6.0), (-5.0, 0.5)] {
            let shifted = u.shifted_from(&Complex::new(Float::with_val(160, re), Float::with_val(160, im))).unwrap();
            let reference = jacobi_singular_values(&shifted).unwrap().pop().unwrap();
            let smin = smallest_singular_value(&shifted, &opts()).unwrap();
            let rel = ((smin - &reference).abs() / reference).to_f64();
            assert!(rel < 1e-20, "z = ({re}, {im}): relative error {rel:e}");
        }
    }

    fn rotation(n: usize, p: usize, q: usize, theta: f64, phi: f64) -> Matrix<f64> {
        let mut u = Matrix::identity(n, ());
        let (c, s) = (theta.cos(), theta.sin());
        let e = Complex::new(phi.cos(), phi.sin());
        u[(p, p)] = Complex::from_real(c);
        u[(q, q)] = Complex::from_real(c);
        u[(p, q)] = e.scale(&-s);
        u[(q, p)] = e.conj().scale(&s);
        u
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn rotations_leave_extremes_unchanged(
            entries in prop::collection::vec((-2.0f64..2.0, -2.0f64..2.0), 16),
            rots in prop::collection::vec((0usize..4, 0usize..4, -3.0f64..3.0, -3.0f64..3.0), 1..5),
        ) {
            let data = entries.iter().map(|&(re, im)| Complex::new(re, im)).collect();
            let a = Matrix::new(4, 4, (), data).unwrap();
            let mut ua = a.clone();
            for &(p, q, theta, phi) in &rots {
                if p != q {
                    ua = crate::linalg::mat_mul(&rotation(4, p, q, theta, phi), &ua).unwrap();
                }
            }
            let (s1, t1) = singular_extremes(&a, &opts()).unwrap();
            let (s2, t2) = singular_extremes(&ua, &opts()).unwrap();
            prop_assert!((s1 - s2).abs() <= 1e-8 * s1.max(1.0));
            prop_assert!((t1 - t2).abs() <= 1e-8 * s1.max(1.0));
        }
    }
}
