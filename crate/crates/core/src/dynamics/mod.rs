//! Time evolution of `f(t) = ⟨w|Aᵗ|v⟩`, vector choices, fits and bounds.

mod bounds;
mod fit;
mod propagate;
mod rng;

pub use bounds::{norm_bounds_track, BoundSample, BoundTrack};
pub use fit::{default_fit_window, growth_rate_fit, periodicity_check, FitReport, PeriodicityReport};
pub use propagate::{CompressedRows, ExpAction, Propagator};
pub use rng::NormalStream;

use std::fmt;
use std::fmt::Write as _;
use std::path::PathBuf;

use rug::{Float, Rational};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::complex::Complex;
use crate::error::{Error, Result};
use crate::io;
use crate::matrix::{Matrix, Vector};
use crate::models::{Family, ModelSpec};
use crate::precision::Precision;
use crate::scalar::{parse_rational, Field, FloatField};

/// How the bra `w` and ket `v` are chosen.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum VectorChoice {
    /// `w` all ones, `v = e₁` (not normalized).
    Special,
    /// Independent standard normal real components, each vector scaled to
    /// unit norm; `w` is drawn first.
    Random { seed: u64 },
    /// Vectors read from vector files.
    Explicit { w: PathBuf, v: PathBuf },
}

impl fmt::Display for VectorChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VectorChoice::Special => f.write_str("special"),
            VectorChoice::Random { seed } => write!(f, "random(seed={seed})"),
            VectorChoice::Explicit { w, v } => {
                write!(f, "explicit(w={}, v={})", w.display(), v.display())
            }
        }
    }
}

/// Builds `(w, v)` of dimension `dim` in the requested backend.
///
/// Random components are generated and normalized in double precision, then
/// converted exactly, so every backend sees the same vectors.
pub fn make_vectors<T: Field>(
    choice: &VectorChoice,
    dim: usize,
    ctx: T::Ctx,
) -> Result<(Vector<T>, Vector<T>)> {
    if dim == 0 {
        return Err(Error::dims("vectors need a positive dimension"));
    }
    match choice {
        VectorChoice::Special => Ok((
            Vector::from_real(vec![T::one(ctx); dim], ctx),
            Vector::basis(dim, 0, ctx),
        )),
        VectorChoice::Random { seed } => {
            let mut stream = NormalStream::new(*seed);
            let mut draw = || {
                let v = stream.unit_vector(dim);
                Vector::from_real(v.into_iter().map(|x| T::from_f64(x, ctx)).collect(), ctx)
            };
            let w = draw();
            let v = draw();
            Ok((w, v))
        }
        VectorChoice::Explicit { w, v } => {
            let w = io::load_vector_as::<T>(w, ctx)?;
            let v = io::load_vector_as::<T>(v, ctx)?;
            for (name, x) in [("w", &w), ("v", &v)] {
                if x.dim() != dim {
                    return Err(Error::dims(format!(
                        "{name} has dimension {}, the matrix has {dim}",
                        x.dim()
                    )));
                }
            }
            Ok((w, v))
        }
    }
}

/// `⟨w|xₜ⟩` for `xₜ₊₁ = P xₜ`, `x₀ = v`, `t = 0..=t_max`.
pub fn evolve_with<T: Field, P: Propagator<T> + ?Sized>(
    prop: &P,
    w: &Vector<T>,
    v: &Vector<T>,
    t_max: u64,
) -> Result<Vec<Complex<T>>> {
    if w.dim() != prop.dim() || v.dim() != prop.dim() {
        return Err(Error::dims(format!(
            "operator of size {} with vectors of dimension {} and {}",
            prop.dim(),
            w.dim(),
            v.dim()
        )));
    }
    let mut out = Vec::with_capacity(t_max as usize + 1);
    let mut state = v.clone();
    out.push(w.braket(&state)?);
    for _ in 0..t_max {
        state = prop.apply(&state)?;
        out.push(w.braket(&state)?);
    }
    Ok(out)
}

/// `f(t) = ⟨w|Aᵗ|v⟩` for `t = 0..=t_max` by repeated sparse matrix–vector
/// products; exact in the rational backend.
pub fn evolve_f<T: Field>(
    a: &Matrix<T>,
    w: &Vector<T>,
    v: &Vector<T>,
    t_max: u64,
) -> Result<Vec<Complex<T>>> {
    evolve_with(&CompressedRows::from_matrix(a)?, w, v, t_max)
}

/// One-step operator for a model in a float backend: the action of
/// `exp(iαH)` for `ehrenfest` (never formed densely), sparse rows otherwise.
pub fn model_propagator<T: FloatField>(spec: &ModelSpec, ctx: T::Ctx) -> Result<Box<dyn Propagator<T>>> {
    let m = spec.build::<T>(ctx)?;
    if spec.family()? == Family::Ehrenfest {
        let scale = Complex::new(T::zero(ctx), spec.alpha::<T>(ctx)?);
        return Ok(Box::new(ExpAction::new(&m, &scale)?));
    }
    Ok(Box::new(CompressedRows::from_matrix(&m)?))
}

/// Evolves a model in any backend and returns the series with every float
/// sample converted losslessly to a rational.
pub fn model_series(
    spec: &ModelSpec,
    choice: &VectorChoice,
    precision: Precision,
    t_max: u64,
) -> Result<TimeSeries<Rational>> {
    fn run<T: Field>(
        prop: &dyn Propagator<T>,
        spec: &ModelSpec,
        choice: &VectorChoice,
        precision: Precision,
        t_max: u64,
        ctx: T::Ctx,
    ) -> Result<TimeSeries<Rational>> {
        let (w, v) = make_vectors::<T>(choice, prop.dim(), ctx)?;
        let part = |x: &T| x.to_rational().ok_or_else(|| Error::invalid("non-finite series value"));
        let values = evolve_with(prop, &w, &v, t_max)?
            .iter()
            .map(|z| Ok(Complex::new(part(&z.re)?, part(&z.im)?)))
            .collect::<Result<Vec<_>>>()?;
        TimeSeries::from_values(spec.describe(), choice.clone(), precision, values)
    }
    spec.validate(precision)?;
    match precision {
        Precision::Exact => {
            if spec.family()? == Family::Ehrenfest {
                return Err(Error::UnsupportedBackend {
                    backend: precision.to_string(),
                    what: "exp(i alpha H) has irrational entries",
                });
            }
            let a = spec.build::<Rational>(())?;
            run(&CompressedRows::from_matrix(&a)?, spec, choice, precision, t_max, ())
        }
        Precision::BigFloat { bits } => {
            run(model_propagator::<Float>(spec, bits)?.as_ref(), spec, choice, precision, t_max, bits)
        }
        Precision::Machine => run(model_propagator::<f64>(spec, ())?.as_ref(), spec, choice, precision, t_max, ()),
    }
}

/// `f(t)` samples with their provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries<T: Field> {
    pub model: String,
    pub vectors: VectorChoice,
    pub precision: Precision,
    samples: Vec<(u64, Complex<T>)>,
}

/// Rendering options for [`TimeSeries::to_csv`].
#[derive(Debug, Clone)]
pub struct CsvOptions<T: Field> {
    /// Significant digits of decimal columns.
    pub digits: usize,
    /// Adds lossless `re_exact,im_exact` columns (`p/q` for rationals).
    pub exact_columns: bool,
    /// Real reference values per sample, added as `reference,deviation`
    /// columns with a `# max_deviation:` footer.
    pub reference: Option<Vec<T>>,
}

impl<T: Field> Default for CsvOptions<T> {
    fn default() -> Self {
        CsvOptions {
            digits: 17,
            exact_columns: false,
            reference: None,
        }
    }
}

fn working_bits<T: Field>(ctx: T::Ctx, digits: usize) -> u32 {
    let wanted = (digits as f64 * std::f64::consts::LOG2_10).ceil() as u32 + 32;
    T::precision(ctx).mantissa_bits().unwrap_or(0).max(wanted).max(64)
}

fn to_big<T: Field>(x: &T, bits: u32) -> Float {
    match x.to_rational() {
        Some(q) => Float::with_val(bits, &q),
        None => Float::with_val(bits, x.to_f64()),
    }
}

/// `|z|` evaluated in a big float of `bits` bits.
pub(crate) fn abs_big<T: Field>(z: &Complex<T>, bits: u32) -> Float {
    to_big(&z.re, bits).hypot(&to_big(&z.im, bits))
}

impl<T: Field> TimeSeries<T> {
    pub fn new(
        model: impl Into<String>,
        vectors: VectorChoice,
        precision: Precision,
        samples: Vec<(u64, Complex<T>)>,
    ) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::invalid("a time series needs at least one sample"));
        }
        if samples.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::invalid("sample times must be strictly increasing"));
        }
        Ok(TimeSeries {
            model: model.into(),
            vectors,
            precision,
            samples,
        })
    }

    /// Series for `t = 0, 1, …` from consecutive values.
    pub fn from_values(
        model: impl Into<String>,
        vectors: VectorChoice,
        precision: Precision,
        values: Vec<Complex<T>>,
    ) -> Result<Self> {
        let samples = values.into_iter().enumerate().map(|(t, z)| (t as u64, z)).collect();
        Self::new(model, vectors, precision, samples)
    }

    pub fn samples(&self) -> &[(u64, Complex<T>)] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn first_t(&self) -> u64 {
        self.samples[0].0
    }

    pub fn last_t(&self) -> u64 {
        self.samples[self.samples.len() - 1].0
    }

    pub fn value_at(&self, t: u64) -> Option<&Complex<T>> {
        self.samples
            .binary_search_by_key(&t, |(s, _)| *s)
            .ok()
            .map(|i| &self.samples[i].1)
    }

    /// `ln|f(t)|` in double precision, valid far outside the double range.
    pub fn ln_abs(&self, t: u64) -> Option<f64> {
        self.value_at(t).map(Complex::ln_abs_f64)
    }

    /// `max_t |f(t) − reference(t)|` evaluated in a wide big float.
    pub fn max_deviation(&self, reference: &[T]) -> Result<f64> {
        if reference.len() != self.samples.len() {
            return Err(Error::dims(format!(
                "{} reference values for {} samples",
                reference.len(),
                self.samples.len()
            )));
        }
        let bits = working_bits::<T>(self.samples[0].1.ctx(), 40);
        let mut worst = Float::new(bits);
        for ((_, z), r) in self.samples.iter().zip(reference) {
            let dev = abs_big(&Complex::new(z.re.clone() - r.clone(), z.im.clone()), bits);
            if dev > worst {
                worst = dev;
            }
        }
        Ok(worst.to_f64())
    }

    pub fn to_csv(&self, opts: &CsvOptions<T>) -> Result<String> {
        if let Some(r) = &opts.reference {
            if r.len() != self.samples.len() {
                return Err(Error::dims(format!(
                    "{} reference values for {} samples",
                    r.len(),
                    self.samples.len()
                )));
            }
        }
        let ctx = self.samples[0].1.ctx();
        let bits = working_bits::<T>(ctx, opts.digits);
        let digits = opts.digits.max(1);
        let mut out = String::from("t,re,im,abs,log_abs");
        if opts.exact_columns {
            out.push_str(",re_exact,im_exact");
        }
        if opts.reference.is_some() {
            out.push_str(",reference,deviation");
        }
        out.push('\n');
        let mut max_dev = Float::new(bits);
        for (idx, (t, z)) in self.samples.iter().enumerate() {
            let abs = abs_big(z, bits);
            let log_abs = if abs.is_zero() {
                "-inf".to_string()
            } else {
                abs.clone().ln().to_string_radix(10, Some(digits))
            };
            write!(
                out,
                "{t},{},{},{},{log_abs}",
                z.re.to_decimal(digits),
                z.im.to_decimal(digits),
                abs.to_string_radix(10, Some(digits)),
            )
            .expect("write to string");
            if opts.exact_columns {
                write!(out, ",{},{}", z.re.to_exact_string(), z.im.to_exact_string())
                    .expect("write to string");
            }
            if let Some(r) = &opts.reference {
                let reference = &r[idx];
                let dev = Complex::new(z.re.clone() - reference.clone(), z.im.clone());
                let dev = abs_big(&dev, bits);
                write!(
                    out,
                    ",{},{}",
                    reference.to_decimal(digits),
                    dev.to_string_radix(10, Some(digits))
                )
                .expect("write to string");
                if dev > max_dev {
                    max_dev = dev;
                }
            }
            out.push('\n');
        }
        if opts.reference.is_some() {
            let footer = if max_dev.is_zero() {
                "0".to_string()
            } else {
                max_dev.to_string_radix(10, Some(digits))
            };
            writeln!(out, "# max_deviation: {footer}").expect("write to string");
        }
        Ok(out)
    }

    pub fn to_json(&self) -> Value {
        let samples: Vec<Value> = self
            .samples
            .iter()
            .map(|(t, z)| json!({"t": t, "re": z.re.to_exact_string(), "im": z.im.to_exact_string()}))
            .collect();
        json!({
            "model": self.model,
            "vectors": self.vectors.to_string(),
            "precision": self.precision.to_string(),
            "samples": samples,
        })
    }
}

impl TimeSeries<Rational> {
    /// Reads a series written by [`TimeSeries::to_csv`] or
    /// [`TimeSeries::to_json`]. Values are recovered exactly from the
    /// `re_exact,im_exact` columns when present, otherwise from the decimal
    /// columns. Provenance comes from `# model:`, `# vectors:` and
    /// `# precision:` comment lines when available.
    pub fn parse(text: &str) -> Result<Self> {
        let trimmed = text.trim_start();
        if trimmed.starts_with('{') {
            return Self::parse_json(trimmed);
        }
        let mut model = String::from("file");
        let mut precision = Precision::Exact;
        let mut header: Option<Vec<String>> = None;
        let mut samples = Vec::new();
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
            if let Some(comment) = line.strip_prefix('#') {
                if let Some((key, value)) = comment.split_once(':') {
                    match key.trim() {
                        "model" => model = value.trim().to_string(),
                        "precision" => precision = value.trim().parse().unwrap_or(precision),
                        _ => {}
                    }
                }
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            let Some(cols) = &header else {
                header = Some(fields.iter().map(|f| f.to_string()).collect());
                continue;
            };
            let col = |name: &str| cols.iter().position(|c| c == name);
            let (re_col, im_col) = match (col("re_exact"), col("im_exact")) {
                (Some(r), Some(i)) => (r, i),
                _ => (
                    col("re").ok_or_else(|| Error::parse("series has no 're' column"))?,
                    col("im").ok_or_else(|| Error::parse("series has no 'im' column"))?,
                ),
            };
            let t_col = col("t").ok_or_else(|| Error::parse("series has no 't' column"))?;
            let field = |k: usize| {
                fields
                    .get(k)
                    .copied()
                    .ok_or_else(|| Error::parse(format!("short row '{line}'")))
            };
            let t: u64 = field(t_col)?
                .parse()
                .map_err(|_| Error::parse(format!("bad time in row '{line}'")))?;
            let re = parse_rational(field(re_col)?)?;
            let im = parse_rational(field(im_col)?)?;
            samples.push((t, Complex::new(re, im)));
        }
        TimeSeries::new(model, VectorChoice::Special, precision, samples)
    }

    fn parse_json(text: &str) -> Result<Self> {
        let doc: Value = serde_json::from_str(text)?;
        let doc = doc.get("series").unwrap_or(&doc);
        let model = doc["model"].as_str().unwrap_or("file").to_string();
        let precision = doc["precision"]
            .as_str()
            .and_then(|p| p.parse().ok())
            .unwrap_or(Precision::Exact);
        let rows = doc["samples"]
            .as_array()
            .ok_or_else(|| Error::parse("series JSON has no 'samples' array"))?;
        let mut samples = Vec::with_capacity(rows.len());
        for row in rows {
            let t = row["t"].as_u64().ok_or_else(|| Error::parse("sample without 't'"))?;
            let part = |key: &str| -> Result<Rational> {
                match &row[key] {
                    Value::String(s) => parse_rational(s),
                    Value::Number(n) => parse_rational(&n.to_string()),
                    _ => Err(Error::parse(format!("sample without '{key}'"))),
                }
            };
            samples.push((t, Complex::new(part("re")?, part("im")?)));
        }
        TimeSeries::new(model, VectorChoice::Special, precision, samples)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::build_block_a;
    use crate::spectral::closed_form_f;
    use proptest::prelude::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::from((n, d))
    }

    #[test]
    fn special_vectors() {
        let (w, v) = make_vectors::<Rational>(&VectorChoice::Special, 4, ()).unwrap();
        assert_eq!(w, Vector::from_real(vec![q(1, 1); 4], ()));
        assert_eq!(v, Vector::basis(4, 0, ()));
        assert_eq!(w.braket(&v).unwrap(), Complex::one(()));
    }

    #[test]
    fn random_vectors_agree_across_backends() {
        let choice = VectorChoice::Random { seed: 42 };
        let (w, v) = make_vectors::<f64>(&choice, 50, ()).unwrap();
        assert!((w.norm() - 1.0).abs() < 1e-12 && (v.norm() - 1.0).abs() < 1e-12);
        assert!(w.as_slice().iter().all(|z| z.im == 0.0));
        let (we, ve) = make_vectors::<Rational>(&choice, 50, ()).unwrap();
        assert_eq!(we.convert::<f64>(()).unwrap(), w);
        assert_eq!(ve.convert::<f64>(()).unwrap(), v);
        let (wb, _) = make_vectors::<Float>(&choice, 50, 256).unwrap();
        assert_eq!(wb.convert::<f64>(()).unwrap(), w);
        assert_ne!(w, v);
    }

    #[test]
    fn special_series_matches_closed_form() {
        let g = q(2, 1);
        let n = 20;
        let a = build_block_a(n, &g).unwrap();
        let (w, v) = make_vectors::<Rational>(&VectorChoice::Special, n, ()).unwrap();
        let f = evolve_f(&a, &w, &v, 2 * (n as u64 + 2)).unwrap();
        for (t, z) in f.iter().enumerate() {
            assert_eq!(z.re, closed_form_f(n, &g, t as u64).unwrap());
            assert!(z.im.cmp0().is_eq());
        }
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let a = build_block_a(4, &q(2, 1)).unwrap();
        let (w, v) = make_vectors::<Rational>(&VectorChoice::Special, 6, ()).unwrap();
        assert!(matches!(evolve_f(&a, &w, &v, 3), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn series_validation_and_csv() {
        let vals = vec![Complex::from_i64(1, ()), Complex::from_i64(-2, ()), Complex::new(q(1, 3), q(0, 1))];
        let s = TimeSeries::from_values("test", VectorChoice::Special, Precision::Exact, vals).unwrap();
        let csv = s
            .to_csv(&CsvOptions {
                digits: 6,
                exact_columns: true,
                reference: Some(vec![q(1, 1), q(-2, 1), q(1, 3)]),
            })
            .unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "t,re,im,abs,log_abs,re_exact,im_exact,reference,deviation");
        assert!(lines[3].contains(",1/3,0,"));
        assert_eq!(lines.last().unwrap(), &"# max_deviation: 0");
        assert!(TimeSeries::<f64>::new("x", VectorChoice::Special, Precision::Machine, vec![]).is_err());
        let unordered = vec![(2, Complex::zero(())), (1, Complex::zero(()))];
        assert!(TimeSeries::<f64>::new("x", VectorChoice::Special, Precision::Machine, unordered).is_err());
    }

    #[test]
    fn series_files_round_trip() {
        let a = build_block_a(6, &q(3, 2)).unwrap();
        let (w, v) = make_vectors::<Rational>(&VectorChoice::Special, 6, ()).unwrap();
        let s = TimeSeries::from_values("m", VectorChoice::Special, Precision::Exact, evolve_f(&a, &w, &v, 20).unwrap()).unwrap();
        let csv = s.to_csv(&CsvOptions { digits: 8, exact_columns: true, reference: None }).unwrap();
        let back = TimeSeries::<Rational>::parse(&format!("# model: m\n{csv}")).unwrap();
        assert_eq!(back.samples(), s.samples());
        assert_eq!(back.model, "m");
        let back = TimeSeries::<Rational>::parse(&s.to_json().to_string()).unwrap();
        assert_eq!(back.samples(), s.samples());
        assert!(TimeSeries::<Rational>::parse("t,x\n1,2\n").is_err());
    }

    #[test]
    fn vector_choice_json() {
        let c = VectorChoice::Random { seed: 7 };
        let s = serde_json::to_string(&c).unwrap();
        assert_eq!(s, r#"{"kind":"random","seed":7}"#);
        assert_eq!(serde_json::from_str::<VectorChoice>(&s).unwrap(), c);
    }

    fn small_vec(n: usize) -> impl Strategy<Value = Vector<Rational>> {
        prop::collection::vec((-5i64..6, 1i64..4, -3i64..4), n).prop_map(|v| {
            Vector::new((), v.into_iter().map(|(a, b, c)| Complex::new(q(a, b), q(c, 2))).collect()).unwrap()
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn evolution_is_linear_in_both_vectors(
            w1 in small_vec(6), w2 in small_vec(6), v1 in small_vec(6), v2 in small_vec(6),
            a_re in -3i64..4, b_re in -3i64..4,
        ) {
            let a = build_block_a(6, &q(3, 2)).unwrap();
            let alpha = Complex::new(q(a_re, 1), q(1, 2));
            let beta = Complex::from_i64(b_re, ());
            let t_max = 10;
            // Linear in v.
            let v = v1.scale(&alpha).add(&v2.scale(&beta)).unwrap();
            let lhs = evolve_f(&a, &w1, &v, t_max).unwrap();
            let f1 = evolve_f(&a, &w1, &v1, t_max).unwrap();
            let f2 = evolve_f(&a, &w1, &v2, t_max).unwrap();
            for t in 0..=t_max as usize {
                prop_assert_eq!(lhs[t].clone(), f1[t].clone() * alpha.clone() + f2[t].clone() * beta.clone());
            }
            // Conjugate-linear in w, since w enters as a bra.
            let w = w1.scale(&alpha).add(&w2.scale(&beta)).unwrap();
            let lhs = evolve_f(&a, &w, &v1, t_max).unwrap();
            let g2 = evolve_f(&a, &w2, &v1, t_max).unwrap();
            for t in 0..=t_max as usize {
                prop_assert_eq!(lhs[t].clone(), f1[t].clone() * alpha.conj() + g2[t].clone() * beta.conj());
            }
        }
    }
}
