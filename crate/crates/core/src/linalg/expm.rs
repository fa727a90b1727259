use crate::complex::Complex;
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::FloatField;

use super::mat_mul;

const MAX_TAYLOR_DEGREE: usize = 4096;

/// Smallest Taylor degree `K` for which the truncation remainder of
/// `exp(X)` is at most `tol`, given `‖X‖ ≤ norm` in a submultiplicative norm.
///
/// The remainder is bounded by `norm^{K+1}/(K+1)! · 1/(1 − norm/(K+2))`.
/// Returns `None` if no degree up to an internal cap suffices.
pub fn exp_action_terms(norm: f64, tol: f64) -> Option<usize> {
    if !(tol > 0.0) || !norm.is_finite() || norm < 0.0 {
        return None;
    }
    if norm == 0.0 {
        return Some(0);
    }
    let ln_norm = norm.ln();
    let ln_tol = tol.ln();
    // ln(norm^{K+1}/(K+1)!), updated incrementally.
    let mut ln_term = ln_norm;
    for k in 0..MAX_TAYLOR_DEGREE {
        let ratio = norm / (k as f64 + 2.0);
        if ratio < 1.0 && ln_term - (1.0 - ratio).ln() <= ln_tol {
            return Some(k);
        }
        ln_term += ln_norm - (k as f64 + 2.0).ln();
    }
    None
}

/// Scaling-and-squaring parameters for one exponential.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpPlan {
    /// Upper bound on `‖X‖₁`.
    pub norm: f64,
    /// Number of squarings `s`; the series is evaluated at `X/2^s`.
    pub squarings: u32,
    /// Taylor degree.
    pub degree: usize,
}

impl ExpPlan {
    /// Picks `s` with `‖X‖/2^s ≤ 1/2`, then the degree whose remainder,
    /// amplified by the squarings, stays below `tol/2`.
    pub fn new(norm: f64, tol: f64) -> Result<Self> {
        if !(tol > 0.0) {
            return Err(Error::invalid(format!("tolerance must be positive, got {tol}")));
        }
        let mut squarings = 0u32;
        while norm / 2f64.powi(squarings as i32) > 0.5 {
            squarings += 1;
        }
        let scaled = norm / 2f64.powi(squarings as i32);
        let amplification = 2f64.powi(squarings as i32) * norm.exp() * 1.01;
        let inner = 0.5 * tol / amplification;
        let degree = exp_action_terms(scaled, inner).ok_or_else(|| {
            Error::invalid(format!("no Taylor degree reaches tolerance {tol}"))
        })?;
        Ok(ExpPlan {
            norm,
            squarings,
            degree,
        })
    }

    /// Mantissa width for which the rounding error of the plan stays below
    /// `tol/2` on an `n × n` matrix.
    pub fn required_bits(&self, n: usize, tol: f64) -> u32 {
        let log2_growth = 0.5 * (n as f64).log2()
            + ((self.degree + 2) as f64 + self.squarings as f64).log2()
            + self.squarings as f64
            + 2.0 * self.norm * std::f64::consts::LOG2_E;
        (log2_growth - (tol / 2.0).log2()).ceil().max(1.0) as u32 + 1
    }
}

/// `exp(scale · h)` with elementwise error at most `tol`.
///
/// Scaling and squaring around a Horner-evaluated truncated Taylor series.
/// The truncation error is bounded rigorously; the rounding error is
/// estimated as `u·√n·(K+2+s)·2^s·e^{2‖X‖}` and must also stay below `tol/2`,
/// otherwise [`Error::ToleranceUnreachable`] reports the width that would
/// suffice.
pub fn mat_exp_scaled<T: FloatField>(
    h: &Matrix<T>,
    scale: &Complex<T>,
    tol: f64,
) -> Result<Matrix<T>> {
    let n = h.require_square()?;
    let ctx = h.ctx();
    let x = h.scale(scale);
    let norm = x.norm_1().to_f64() * (1.0 + 1e-12);
    if !norm.is_finite() {
        return Err(Error::invalid("matrix norm is not finite"));
    }
    let plan = ExpPlan::new(norm, tol)?;
    let available = T::mantissa_bits(ctx);
    let required = plan.required_bits(n, tol);
    if required > available {
        return Err(Error::ToleranceUnreachable {
            tol,
            available_bits: available,
            required_bits: required,
        });
    }

    let mut y = x;
    if plan.squarings > 0 {
        let factor = T::from_i64(2, ctx).powi(-i64::from(plan.squarings));
        y = y.scale(&Complex::from_real(factor));
    }

    // Horner: I + Y/1 (I + Y/2 (I + ... (I + Y/K))).
    let id = Matrix::identity(n, ctx);
    let mut acc = id.clone();
    for k in (1..=plan.degree).rev() {
        let step = y.scale(&Complex::from_real(T::one(ctx) / T::from_i64(k as i64, ctx)));
        acc = id.add(&mat_mul(&step, &acc)?)?;
    }
    for _ in 0..plan.squarings {
        acc = mat_mul(&acc, &acc)?;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::mat_pow;
    use crate::models::build_ehrenfest_h;
    use proptest::prelude::*;
    use rug::Float;

    #[test]
    fn zero_scale_gives_identity() {
        let h = build_ehrenfest_h(5).unwrap().convert::<f64>(()).unwrap();
        let e = mat_exp_scaled(&h, &Complex::zero(()), 1e-14).unwrap();
        assert!(e.is_identity());
    }

    #[test]
    fn involution_exponential() {
        let h = build_ehrenfest_h(2).unwrap().convert::<Float>(256).unwrap();
        let pi = Float::pi(256);
        let scale = Complex::new(Float::new(256), pi / 4u32);
        let e = mat_exp_scaled(&h, &scale, 1e-60).unwrap();
        let half = Float::with_val(256, 2).sqrt() / 2u32;
        let expected = Matrix::from_fn(2, 2, 256, |i, j| {
            if i == j {
                Complex::new(half.clone(), Float::new(256))
            } else {
                Complex::new(Float::new(256), half.clone())
            }
        });
        assert!(e.max_abs_diff(&expected).unwrap() < 1e-60f64);
    }

    #[test]
    fn ehrenfest_exponential_is_a_root_of_minus_identity() {
        for n in [6usize, 10, 50] {
            let bits = 256;
            let h = build_ehrenfest_h(n).unwrap().convert::<Float>(bits).unwrap();
            let alpha = Float::pi(bits) / (2 * n as u32);
            let scale = Complex::new(Float::new(bits), alpha);
            let a = mat_exp_scaled(&h, &scale, 1e-40).unwrap();
            let p = mat_pow(&a, 2 * n as u64).unwrap();
            let minus_id = Matrix::identity(n, bits).neg();
            let err = p.max_abs_diff(&minus_id).unwrap();
            assert!(err < 1e-20f64, "N={n}: {err}");
        }
    }

    #[test]
    fn machine_width_rejects_tiny_tolerance() {
        let h = build_ehrenfest_h(4).unwrap().convert::<f64>(()).unwrap();
        let err = mat_exp_scaled(&h, &Complex::new(0.0, 0.5), 1e-30).unwrap_err();
        match err {
            Error::ToleranceUnreachable {
                available_bits,
                required_bits,
                ..
            } => {
                assert_eq!(available_bits, 53);
                assert!(required_bits > 100);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn taylor_degree_bound() {
        assert_eq!(exp_action_terms(0.0, 1e-10), Some(0));
        let k = exp_action_terms(0.5, 1e-16).unwrap();
        // 0.5^{k+1}/(k+1)! must be below the tolerance, but not at k-1.
        let rem = |k: usize| 0.5f64.powi(k as i32 + 1) / (1..=k + 1).map(|i| i as f64).product::<f64>();
        assert!(rem(k) <= 1e-16);
        assert!(rem(k - 1) > 1e-16 * 0.5);
        assert!(exp_action_terms(1.0, -1.0).is_none());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn half_step_squared_agrees(
            entries in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 9),
            sre in -2.0f64..2.0,
            sim in -2.0f64..2.0,
        ) {
            let bits = 160;
            let data = entries
                .iter()
                .map(|&(re, im)| Complex::from_f64_pair(re, im, bits))
                .collect();
            let h = Matrix::<Float>::new(3, 3, bits, data).unwrap();
            let s = Complex::from_f64_pair(sre, sim, bits);
            let half = s.div_real(&Float::with_val(bits, 2));
            let tol = 1e-30;
            let full = mat_exp_scaled(&h, &s, tol).unwrap();
            let e = mat_exp_scaled(&h, &half, tol).unwrap();
            let sq = crate::linalg::mat_mul(&e, &e).unwrap();
            prop_assert!(full.max_abs_diff(&sq).unwrap() <= 4.0 * tol);
        }
    }
}
