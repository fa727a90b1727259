//! Norm tracks `‖Aᵗ‖₂` against `ρᵗ`, `‖A‖₂ᵗ` and `κ(V)ρᵗ`.

use std::fmt::Write as _;

use crate::error::Result;
use crate::linalg::{largest_singular_value, mat_mul, SvdOptions};
use crate::matrix::Matrix;
use crate::scalar::FloatField;
use crate::spectral::{eigenvector_matrix_condition, EigenSystem};

#[derive(Debug, Clone, PartialEq)]
pub struct BoundSample<T> {
    pub t: u64,
    pub norm_at: T,
    pub rho_t: T,
    pub norm_a_pow_t: T,
    pub kappa_rho_t: T,
}

/// Norm tracks for `t = 0..=t_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundTrack<T> {
    pub kappa: T,
    pub samples: Vec<BoundSample<T>>,
}

impl<T: FloatField> BoundTrack<T> {
    /// Times where `ρᵗ ≤ ‖Aᵗ‖ ≤ min(‖A‖ᵗ, κρᵗ)` fails by more than `rel_tol`
    /// relative to the larger side.
    pub fn violations(&self, rel_tol: f64) -> Vec<u64> {
        let below = |small: &T, big: &T| {
            let (s, b) = (small.to_f64(), big.to_f64());
            s <= b + rel_tol * s.abs().max(b.abs())
        };
        self.samples
            .iter()
            .filter(|s| {
                !(below(&s.rho_t, &s.norm_at)
                    && below(&s.norm_at, &s.norm_a_pow_t)
                    && below(&s.norm_at, &s.kappa_rho_t))
            })
            .map(|s| s.t)
            .collect()
    }

    pub fn to_csv(&self, digits: usize) -> String {
        let mut out = String::from("t,norm_At,rho_t,normA_pow_t,kappa_rho_t\n");
        for s in &self.samples {
            writeln!(
                out,
                "{},{},{},{},{}",
                s.t,
                s.norm_at.to_decimal(digits),
                s.rho_t.to_decimal(digits),
                s.norm_a_pow_t.to_decimal(digits),
                s.kappa_rho_t.to_decimal(digits)
            )
            .expect("write to string");
        }
        out
    }
}

/// Computes the four tracks with `κ = κ(V)` from the eigensystem's right
/// eigenvector matrix. Powers are formed by successive dense products.
pub fn norm_bounds_track<T: FloatField>(
    a: &Matrix<T>,
    es: &EigenSystem<T>,
    t_max: u64,
    opts: &SvdOptions,
) -> Result<BoundTrack<T>> {
    let n = a.require_square()?;
    let ctx = a.ctx();
    let kappa = eigenvector_matrix_condition(es, opts)?;
    let rho = es.spectral_radius();
    let norm_a = largest_singular_value(a, opts)?;
    let mut power = Matrix::identity(n, ctx);
    let mut rho_t = T::one(ctx);
    let mut norm_a_t = T::one(ctx);
    let mut samples = Vec::with_capacity(t_max as usize + 1);
    for t in 0..=t_max {
        if t > 0 {
            power = mat_mul(&power, a)?;
            rho_t = rho_t * rho.clone();
            norm_a_t = norm_a_t * norm_a.clone();
        }
        let norm_at = if t == 0 {
            T::one(ctx)
        } else {
            largest_singular_value(&power, opts)?
        };
        samples.push(BoundSample {
            t,
            norm_at,
            rho_t: rho_t.clone(),
            norm_a_pow_t: norm_a_t.clone(),
            kappa_rho_t: kappa.clone() * rho_t.clone(),
        });
    }
    Ok(BoundTrack { kappa, samples })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::Complex;
    use crate::models::build_block_a;
    use crate::spectral::eigen_a;
    use proptest::prelude::*;
    use rug::Float;

    #[test]
    fn sandwich_holds_for_block_transfer() {
        let bits = 256;
        let n = 20;
        for g in [1.5, 2.0] {
            let g = Float::with_val(bits, g);
            let a = build_block_a(n, &g).unwrap();
            let es = eigen_a(n, &g).unwrap();
            let track = norm_bounds_track(&a, &es, 2 * (n as u64 + 2), &SvdOptions::default()).unwrap();
            assert!(track.violations(1e-8).is_empty());
            let first = &track.samples[0];
            assert_eq!(first.norm_at.to_f64(), 1.0);
            assert_eq!(first.rho_t.to_f64(), 1.0);
            assert_eq!(first.norm_a_pow_t.to_f64(), 1.0);
            assert_eq!(first.kappa_rho_t, track.kappa);
            let period = &track.samples[n + 2];
            assert!((period.norm_at.to_f64() - 1.0).abs() < 1e-20);
            // |⟨w|A^M|v⟩| = g^{M−1} with ‖w‖ = √N, ‖v‖ = 1 forces transient growth.
            let m = n / 2;
            let floor = g.to_f64().powi(m as i32 - 1) / (n as f64).sqrt();
            assert!(track.samples[m].norm_at.to_f64() >= floor * (1.0 - 1e-12));
        }
    }

    #[test]
    fn csv_header() {
        let a = build_block_a(4, &2.0f64).unwrap();
        let es = eigen_a(4, &2.0f64).unwrap();
        let csv = norm_bounds_track(&a, &es, 3, &SvdOptions::default()).unwrap().to_csv(8);
        assert!(csv.starts_with("t,norm_At,rho_t,normA_pow_t,kappa_rho_t\n0,"));
        assert_eq!(csv.lines().count(), 5);
    }

    fn rotation(theta: f64) -> (Matrix<f64>, EigenSystem<f64>) {
        let (c, s) = (theta.cos(), theta.sin());
        let a = Matrix::from_fn(2, 2, (), |i, j| {
            Complex::from_real([[c, -s], [s, c]][i][j])
        });
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let right = Matrix::new(
            2,
            2,
            (),
            vec![
                Complex::from_real(r),
                Complex::from_real(r),
                Complex::new(0.0, -r),
                Complex::new(0.0, r),
            ],
        )
        .unwrap();
        let left = right.adjoint();
        let es = EigenSystem {
            eigenvalues: vec![Complex::new(c, s), Complex::new(c, -s)],
            right,
            left,
        };
        (a, es)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn rotations_have_unit_tracks(theta in 0.0f64..6.28) {
            let (a, es) = rotation(theta);
            prop_assert!(es.max_residual(&a).unwrap() < 1e-12);
            let track = norm_bounds_track(&a, &es, 30, &SvdOptions::default()).unwrap();
            for s in &track.samples {
                prop_assert!((s.norm_at - 1.0).abs() < 1e-10);
                prop_assert!((s.rho_t - 1.0).abs() < 1e-10);
            }
        }
    }
}
