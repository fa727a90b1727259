//! Constructors for the matrix families and the serializable model description.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use rug::Rational;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::complex::Complex;
use crate::error::{Error, Result};
use crate::io;
use crate::linalg::{mat_exp_scaled, mat_inverse, mat_mul};
use crate::matrix::Matrix;
use crate::precision::Precision;
use crate::scalar::{is_rational_literal, parse_rational, Field, FloatField};

fn require_positive<T: Field>(g: &T, name: &str) -> Result<()> {
    if *g <= T::zero(g.ctx()) {
        return Err(Error::invalid(format!("{name} must be positive")));
    }
    Ok(())
}

/// `m × m` tridiagonal Toeplitz matrix with `g` below and `1/g` above the diagonal.
pub fn build_toeplitz_b<T: Field>(m: usize, g: &T) -> Result<Matrix<T>> {
    if m == 0 {
        return Err(Error::invalid("Toeplitz size must be at least 1"));
    }
    require_positive(g, "g")?;
    let ctx = g.ctx();
    let inv = T::one(ctx) / g.clone();
    Ok(Matrix::from_fn(m, m, ctx, |i, j| {
        if i == j + 1 {
            Complex::from_real(g.clone())
        } else if j == i + 1 {
            Complex::from_real(inv.clone())
        } else {
            Complex::zero(ctx)
        }
    }))
}

/// The `n × n` block matrix `[[B, I], [−I, 0]]` with `B = build_toeplitz_b(n/2, g)`.
///
/// Its `(n+2)`-th power is the identity.
pub fn build_block_a<T: Field>(n: usize, g: &T) -> Result<Matrix<T>> {
    if n < 2 || n % 2 != 0 {
        return Err(Error::invalid(format!(
            "block-transfer size must be even and at least 2, got {n}"
        )));
    }
    let m = n / 2;
    let ctx = g.ctx();
    let b = build_toeplitz_b(m, g)?;
    let id = Matrix::identity(m, ctx);
    Matrix::from_blocks(&b, &id, &id.neg(), &Matrix::zeros(m, m, ctx))
}

/// Ehrenfest (Kac–Sylvester) matrix: superdiagonal `1, 2, …, n−1` and
/// subdiagonal `n−1, …, 1`. Its spectrum is `{−(n−1), −(n−3), …, n−1}`.
pub fn build_ehrenfest_h(n: usize) -> Result<Matrix<Rational>> {
    if n < 2 {
        return Err(Error::invalid(format!("Ehrenfest size must be at least 2, got {n}")));
    }
    Ok(Matrix::from_fn(n, n, (), |i, j| {
        if j == i + 1 {
            Complex::from_i64(j as i64, ())
        } else if i == j + 1 {
            Complex::from_i64((n - i) as i64, ())
        } else {
            Complex::zero(())
        }
    }))
}

/// `[[0, g], [1/g, 0]]`, an involution for every `g > 0`.
pub fn build_tilted_pauli<T: Field>(g: &T) -> Result<Matrix<T>> {
    require_positive(g, "g")?;
    let ctx = g.ctx();
    let inv = T::one(ctx) / g.clone();
    let zero = Complex::zero(ctx);
    Matrix::new(
        2,
        2,
        ctx,
        vec![zero.clone(), Complex::from_real(g.clone()), Complex::from_real(inv), zero],
    )
}

/// Transfer matrix of a tight-binding strip at energy `energy`:
/// `[[T⁻¹(E − H₀), −T⁻¹T†], [I, 0]]` with on-site block `H₀` and hopping block `T`.
pub fn transfer_from_tight_binding<T: Field>(
    energy: &T,
    onsite: &Matrix<T>,
    hopping: &Matrix<T>,
) -> Result<Matrix<T>> {
    let w = onsite.require_square()?;
    if hopping.require_square()? != w {
        return Err(Error::dims(format!(
            "on-site block is {w}x{w}, hopping block is {0}x{0}",
            hopping.rows()
        )));
    }
    let ctx = onsite.ctx();
    let hop_inv = mat_inverse(hopping)?;
    let shifted = onsite.shifted_from(&Complex::from_real(energy.clone()))?;
    let top_left = mat_mul(&hop_inv, &shifted)?;
    let top_right = mat_mul(&hop_inv, &hopping.adjoint())?.neg();
    Matrix::from_blocks(
        &top_left,
        &top_right,
        &Matrix::identity(w, ctx),
        &Matrix::zeros(w, w, ctx),
    )
}

/// A real model parameter given either as a rational literal (`3/2`, `2`)
/// or as a decimal literal (`1.5`). Decimal literals are read exactly but
/// imply a float backend.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarParam {
    text: String,
    value: Rational,
    rational: bool,
}

impl ScalarParam {
    pub fn from_rational(q: Rational) -> Self {
        ScalarParam {
            text: q.to_string(),
            value: q,
            rational: true,
        }
    }

    pub fn value(&self) -> &Rational {
        &self.value
    }

    /// True when given as `p/q` or an integer.
    pub fn is_rational(&self) -> bool {
        self.rational
    }

    pub fn to_field<T: Field>(&self, ctx: T::Ctx) -> T {
        T::from_rational(&self.value, ctx)
    }

    pub fn to_f64(&self) -> f64 {
        self.value.to_f64()
    }
}

impl FromStr for ScalarParam {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let value = parse_rational(s)?;
        Ok(ScalarParam {
            text: s.trim().to_string(),
            value,
            rational: is_rational_literal(s),
        })
    }
}

impl fmt::Display for ScalarParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text)
    }
}

impl Serialize for ScalarParam {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.text)
    }
}

impl<'de> Deserialize<'de> for ScalarParam {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = serde_json::Value::deserialize(d)?;
        let text = match v {
            serde_json::Value::String(s) => s,
            serde_json::Value::Number(n) => n.to_string(),
            other => {
                return Err(serde::de::Error::custom(format!(
                    "expected a number or numeric string, got {other}"
                )))
            }
        };
        text.parse().map_err(serde::de::Error::custom)
    }
}

/// Matrix family selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    BlockTransfer,
    ToeplitzB,
    Ehrenfest,
    TiltedPauli,
    TightBindingTransfer,
    ExternalFile,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::BlockTransfer => "block-transfer",
            Family::ToeplitzB => "toeplitz-b",
            Family::Ehrenfest => "ehrenfest",
            Family::TiltedPauli => "tilted-pauli",
            Family::TightBindingTransfer => "tight-binding-transfer",
            Family::ExternalFile => "external-file",
        }
    }

    /// Families with closed-form spectra.
    pub fn is_analytic(self) -> bool {
        matches!(
            self,
            Family::BlockTransfer | Family::ToeplitzB | Family::Ehrenfest | Family::TiltedPauli
        )
    }

    fn uses_g(self) -> bool {
        matches!(self, Family::BlockTransfer | Family::ToeplitzB | Family::TiltedPauli)
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Default tilt parameter.
pub const DEFAULT_G: i64 = 2;

/// Parameters of one model, shared by the CLI, config files and tests.
///
/// `n` is the matrix size for `block-transfer` and `ehrenfest`, and the
/// Toeplitz size `M` for `toeplitz-b`. `alpha` is the Ehrenfest time step
/// (default `π/(2n)`). The tight-binding family reads its on-site and
/// hopping blocks from matrix files.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub family: Option<Family>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g: Option<ScalarParam>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<ScalarParam>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub energy: Option<ScalarParam>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub onsite: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hopping: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
}

impl ModelSpec {
    pub fn block_transfer(n: usize, g: Rational) -> Self {
        ModelSpec {
            family: Some(Family::BlockTransfer),
            n: Some(n),
            g: Some(ScalarParam::from_rational(g)),
            ..Default::default()
        }
    }

    pub fn toeplitz_b(m: usize, g: Rational) -> Self {
        ModelSpec {
            family: Some(Family::ToeplitzB),
            n: Some(m),
            g: Some(ScalarParam::from_rational(g)),
            ..Default::default()
        }
    }

    pub fn ehrenfest(n: usize) -> Self {
        ModelSpec {
            family: Some(Family::Ehrenfest),
            n: Some(n),
            ..Default::default()
        }
    }

    pub fn tilted_pauli(g: Rational) -> Self {
        ModelSpec {
            family: Some(Family::TiltedPauli),
            g: Some(ScalarParam::from_rational(g)),
            ..Default::default()
        }
    }

    pub fn external(path: impl Into<PathBuf>) -> Self {
        ModelSpec {
            family: Some(Family::ExternalFile),
            path: Some(path.into()),
            ..Default::default()
        }
    }

    pub fn family(&self) -> Result<Family> {
        self.family
            .ok_or_else(|| Error::invalid("model family is required"))
    }

    fn size(&self) -> Result<usize> {
        self.n
            .ok_or_else(|| Error::invalid(format!("{} requires n", self.family.map_or("model", Family::name))))
    }

    /// The tilt `g`, defaulting to 2.
    pub fn g(&self) -> ScalarParam {
        self.g
            .clone()
            .unwrap_or_else(|| ScalarParam::from_rational(Rational::from(DEFAULT_G)))
    }

    /// Checks parameters against the family and the chosen backend.
    pub fn validate(&self, precision: Precision) -> Result<()> {
        let family = self.family()?;
        if family.uses_g() {
            let g = self.g();
            if g.value().cmp0() != std::cmp::Ordering::Greater {
                return Err(Error::invalid("g must be positive"));
            }
            if precision.is_exact() && !g.is_rational() {
                return Err(Error::invalid(format!(
                    "exact precision needs a rational g (p/q or integer), got '{g}'"
                )));
            }
        }
        match family {
            Family::BlockTransfer => {
                let n = self.size()?;
                if n < 2 || n % 2 != 0 {
                    return Err(Error::invalid(format!(
                        "block-transfer needs an even n >= 2, got {n}"
                    )));
                }
            }
            Family::ToeplitzB => {
                if self.size()? == 0 {
                    return Err(Error::invalid("toeplitz-b needs n >= 1"));
                }
            }
            Family::Ehrenfest => {
                if self.size()? < 2 {
                    return Err(Error::invalid("ehrenfest needs n >= 2"));
                }
            }
            Family::TiltedPauli => {}
            Family::TightBindingTransfer => {
                if self.onsite.is_none() || self.hopping.is_none() {
                    return Err(Error::invalid(
                        "tight-binding-transfer needs on-site and hopping matrix files",
                    ));
                }
                if let Some(e) = &self.energy {
                    if precision.is_exact() && !e.is_rational() {
                        return Err(Error::invalid(format!(
                            "exact precision needs a rational energy, got '{e}'"
                        )));
                    }
                }
            }
            Family::ExternalFile => {
                if self.path.is_none() {
                    return Err(Error::invalid("external-file needs a matrix path"));
                }
            }
        }
        if let Some(a) = &self.alpha {
            if family != Family::Ehrenfest {
                return Err(Error::invalid("alpha only applies to the ehrenfest family"));
            }
            if a.value().cmp0() == std::cmp::Ordering::Equal {
                return Err(Error::invalid("alpha must be nonzero"));
            }
        }
        Ok(())
    }

    /// Matrix dimension, when known without reading files.
    pub fn dimension(&self) -> Option<usize> {
        match self.family? {
            Family::BlockTransfer | Family::ToeplitzB | Family::Ehrenfest => self.n,
            Family::TiltedPauli => Some(2),
            Family::TightBindingTransfer | Family::ExternalFile => None,
        }
    }

    /// Ehrenfest time step `α`, defaulting to `π/(2n)`.
    pub fn alpha<T: FloatField>(&self, ctx: T::Ctx) -> Result<T> {
        match &self.alpha {
            Some(a) => Ok(a.to_field(ctx)),
            None => {
                let n = self.size()?;
                Ok(T::pi(ctx) / T::from_i64(2 * n as i64, ctx))
            }
        }
    }

    /// Builds the model matrix. For `ehrenfest` this is the generator `H`;
    /// the evolution operator is `exp(iαH)`.
    pub fn build<T: Field>(&self, ctx: T::Ctx) -> Result<Matrix<T>> {
        self.validate(T::precision(ctx))?;
        let family = self.family()?;
        match family {
            Family::BlockTransfer => build_block_a(self.size()?, &self.g().to_field::<T>(ctx)),
            Family::ToeplitzB => build_toeplitz_b(self.size()?, &self.g().to_field::<T>(ctx)),
            Family::TiltedPauli => build_tilted_pauli(&self.g().to_field::<T>(ctx)),
            Family::Ehrenfest => build_ehrenfest_h(self.size()?)?.convert(ctx),
            Family::TightBindingTransfer => {
                let onsite = io::load_matrix_as::<T>(self.onsite.as_ref().unwrap(), ctx)?;
                let hopping = io::load_matrix_as::<T>(self.hopping.as_ref().unwrap(), ctx)?;
                let energy = self
                    .energy
                    .as_ref()
                    .map_or_else(|| T::zero(ctx), |e| e.to_field(ctx));
                transfer_from_tight_binding(&energy, &onsite, &hopping)
            }
            Family::ExternalFile => io::load_matrix_as::<T>(self.path.as_ref().unwrap(), ctx),
        }
    }

    /// The matrix whose powers drive the dynamics: `exp(iαH)` for
    /// `ehrenfest`, the model matrix otherwise. The exponential is accurate
    /// to about two thirds of the working digits.
    pub fn evolution_matrix<T: FloatField>(&self, ctx: T::Ctx) -> Result<Matrix<T>> {
        let m = self.build::<T>(ctx)?;
        if self.family()? != Family::Ehrenfest {
            return Ok(m);
        }
        let tol = T::epsilon(ctx).to_f64().powf(2.0 / 3.0).max(1e-300);
        let scale = Complex::new(T::zero(ctx), self.alpha::<T>(ctx)?);
        mat_exp_scaled(&m, &scale, tol)
    }

    /// One-line provenance label, e.g. `block-transfer(n=400, g=2)`.
    pub fn describe(&self) -> String {
        let Some(family) = self.family else {
            return "unspecified".to_string();
        };
        let mut parts = Vec::new();
        if let Some(n) = self.n {
            parts.push(format!("n={n}"));
        }
        if family.uses_g() {
            parts.push(format!("g={}", self.g()));
        }
        if let Some(a) = &self.alpha {
            parts.push(format!("alpha={a}"));
        }
        if let Some(e) = &self.energy {
            parts.push(format!("energy={e}"));
        }
        for (label, p) in [("onsite", &self.onsite), ("hopping", &self.hopping), ("path", &self.path)] {
            if let Some(p) = p {
                parts.push(format!("{label}={}", p.display()));
            }
        }
        format!("{family}({})", parts.join(", "))
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}
