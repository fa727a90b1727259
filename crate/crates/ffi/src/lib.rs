//! C ABI over the pseudopower toolkit.
//!
//! Objects cross the boundary as opaque handles owned by the caller and
//! released with the matching `pp_*_free`. Every fallible call returns a
//! [`PpStatus`]; on failure the message is available from
//! [`pp_last_error`] on the same thread. Strings returned through `out`
//! parameters are released with [`pp_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use pseudopower::dynamics::{evolve_f, growth_rate_fit, make_vectors, model_series, CsvOptions, TimeSeries, VectorChoice};
use pseudopower::linalg::{smallest_singular_value, SvdOptions};
use pseudopower::models::ScalarParam;
use pseudopower::scalar::{Field, FloatField};
use pseudopower::spectral::closed_form_f;
use pseudopower::{with_matrix, Complex, DynMatrix, Error, Matrix, ModelSpec, Precision};
use rug::{Float, Rational};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PpStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    PrecisionMismatch = 4,
    Singular = 5,
    NonConvergence = 6,
    ToleranceUnreachable = 7,
    UnsupportedBackend = 8,
    Parse = 9,
    Io = 10,
    Panic = 11,
}

/// Vector pair used by the evolution calls.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PpVectors {
    /// The structured pair of the model family.
    Special = 0,
    /// Seeded Gaussian unit vectors.
    Random = 1,
}

/// Opaque model description.
pub struct PpModel(ModelSpec);

/// Opaque matrix in one of the arithmetic backends.
pub struct PpMatrix(DynMatrix);

/// Opaque time series `f(t)`, stored exactly.
pub struct PpSeries(TimeSeries<Rational>);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(msg: &str) {
    let text = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = text);
}

fn status_of(err: &Error) -> PpStatus {
    match err {
        Error::DimensionMismatch(_) | Error::NotSquare { .. } => PpStatus::DimensionMismatch,
        Error::PrecisionMismatch { .. } => PpStatus::PrecisionMismatch,
        Error::Singular { .. } => PpStatus::Singular,
        Error::NonConvergence { .. } => PpStatus::NonConvergence,
        Error::ToleranceUnreachable { .. } => PpStatus::ToleranceUnreachable,
        Error::UnsupportedBackend { .. } => PpStatus::UnsupportedBackend,
        Error::InvalidParameter(_) => PpStatus::InvalidArgument,
        Error::Parse(_) | Error::Json(_) => PpStatus::Parse,
        Error::Io(_) => PpStatus::Io,
    }
}

enum Failure {
    Null(&'static str),
    Core(Error),
}

impl From<Error> for Failure {
    fn from(err: Error) -> Self {
        Failure::Core(err)
    }
}

type Outcome = Result<(), Failure>;

/// Runs `body`, translating errors and panics into a status code.
fn guard(body: impl FnOnce() -> Outcome) -> PpStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            set_last_error("");
            PpStatus::Ok
        }
        Ok(Err(Failure::Null(what))) => {
            set_last_error(&format!("null pointer: {what}"));
            PpStatus::NullPointer
        }
        Ok(Err(Failure::Core(err))) => {
            set_last_error(&err.to_string());
            status_of(&err)
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<String>()
                .map(String::as_str)
                .or_else(|| payload.downcast_ref::<&str>().copied())
                .unwrap_or("unknown panic");
            set_last_error(&format!("internal panic: {msg}"));
            PpStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &'static str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure::Null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure::Core(Error::Parse(format!("{what} is not valid UTF-8"))))
}

unsafe fn ref_arg<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or(Failure::Null(what))
}

unsafe fn write_out<T>(out: *mut T, value: T, what: &'static str) -> Outcome {
    if out.is_null() {
        return Err(Failure::Null(what));
    }
    out.write(value);
    Ok(())
}

unsafe fn precision_arg(p: *const c_char) -> Result<Precision, Failure> {
    if p.is_null() {
        return Ok(Precision::default());
    }
    Ok(str_arg(p, "precision")?.parse()?)
}

fn vector_choice(kind: PpVectors, seed: u64) -> VectorChoice {
    match kind {
        PpVectors::Special => VectorChoice::Special,
        PpVectors::Random => VectorChoice::Random { seed },
    }
}

fn into_c_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).unwrap_or_default().into_raw()
}

/// Message of the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn pp_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn pp_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn pp_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses a model description from JSON, e.g.
/// `{"family": "block-transfer", "n": 20, "g": "2"}`.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pp_model_from_json(json: *const c_char, out: *mut *mut PpModel) -> PpStatus {
    guard(|| {
        let spec = ModelSpec::from_json_str(str_arg(json, "json")?)?;
        spec.family()?;
        write_out(out, Box::into_raw(Box::new(PpModel(spec))), "out")
    })
}

/// # Safety
/// `model` must come from [`pp_model_from_json`] or be null.
#[no_mangle]
pub unsafe extern "C" fn pp_model_free(model: *mut PpModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Builds the model matrix. `precision` is `exact`, `big:<bits>` or
/// `machine`; null selects the default backend.
///
/// # Safety
/// Pointers must be valid; `precision` may be null.
#[no_mangle]
pub unsafe extern "C" fn pp_matrix_build(
    model: *const PpModel,
    precision: *const c_char,
    out: *mut *mut PpMatrix,
) -> PpStatus {
    guard(|| {
        let spec = &ref_arg(model, "model")?.0;
        let precision = precision_arg(precision)?;
        spec.validate(precision)?;
        let m = DynMatrix::build(spec, precision)?;
        write_out(out, Box::into_raw(Box::new(PpMatrix(m))), "out")
    })
}

/// Loads a matrix JSON file.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pp_matrix_load(path: *const c_char, out: *mut *mut PpMatrix) -> PpStatus {
    guard(|| {
        let m = pseudopower::io::load_matrix(str_arg(path, "path")?)?;
        write_out(out, Box::into_raw(Box::new(PpMatrix(m))), "out")
    })
}

/// # Safety
/// `matrix` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn pp_matrix_free(matrix: *mut PpMatrix) {
    if !matrix.is_null() {
        drop(Box::from_raw(matrix));
    }
}

/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn pp_matrix_shape(matrix: *const PpMatrix, rows: *mut usize, cols: *mut usize) -> PpStatus {
    guard(|| {
        let m = &ref_arg(matrix, "matrix")?.0;
        write_out(rows, m.rows(), "rows")?;
        write_out(cols, m.cols(), "cols")
    })
}

/// Entry `(i, j)` rounded to double precision.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn pp_matrix_entry(
    matrix: *const PpMatrix,
    i: usize,
    j: usize,
    re: *mut f64,
    im: *mut f64,
) -> PpStatus {
    guard(|| {
        let m = &ref_arg(matrix, "matrix")?.0;
        if i >= m.rows() || j >= m.cols() {
            return Err(Error::DimensionMismatch(format!(
                "entry ({i}, {j}) outside a {}x{} matrix",
                m.rows(),
                m.cols()
            ))
            .into());
        }
        let (x, y) = with_matrix!(m, a => a[(i, j)].to_f64_pair());
        write_out(re, x, "re")?;
        write_out(im, y, "im")
    })
}

/// Serialises the matrix in the lossless JSON interchange format.
///
/// # Safety
/// Pointers must be valid; free the result with [`pp_string_free`].
#[no_mangle]
pub unsafe extern "C" fn pp_matrix_to_json(matrix: *const PpMatrix, out: *mut *mut c_char) -> PpStatus {
    guard(|| {
        let text = ref_arg(matrix, "matrix")?.0.to_json()?;
        write_out(out, into_c_string(text), "out")
    })
}

/// `log10 s_min(zI - A)` at `z = re + i im`. Exact matrices are evaluated
/// in 256-bit floating point.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn pp_matrix_smin_level(
    matrix: *const PpMatrix,
    re: f64,
    im: f64,
    level: *mut f64,
) -> PpStatus {
    fn level_of<T: FloatField>(a: &Matrix<T>, re: f64, im: f64) -> Result<f64, Error> {
        let z = Complex::from_f64_pair(re, im, a.ctx());
        let s = smallest_singular_value(&a.shifted_from(&z)?, &SvdOptions::default())?;
        Ok(s.log2_abs() * std::f64::consts::LOG10_2)
    }
    guard(|| {
        if !(re.is_finite() && im.is_finite()) {
            return Err(Error::InvalidParameter("shift must be finite".into()).into());
        }
        let value = match &ref_arg(matrix, "matrix")?.0 {
            DynMatrix::Exact(a) => level_of::<Float>(&a.convert(256)?, re, im)?,
            DynMatrix::Big(a) => level_of(a, re, im)?,
            DynMatrix::Machine(a) => level_of(a, re, im)?,
        };
        write_out(level, value, "level")
    })
}

/// `f(t) = <w|A^t|v>` for `t = 0..=t_max` on an explicit matrix.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn pp_matrix_evolve(
    matrix: *const PpMatrix,
    vectors: PpVectors,
    seed: u64,
    t_max: u64,
    out: *mut *mut PpSeries,
) -> PpStatus {
    fn run<T: Field>(a: &Matrix<T>, choice: &VectorChoice, t_max: u64) -> Result<TimeSeries<Rational>, Error> {
        let (w, v) = make_vectors::<T>(choice, a.rows(), a.ctx())?;
        let part = |x: &T| {
            x.to_rational()
                .ok_or_else(|| Error::InvalidParameter("non-finite series value".into()))
        };
        let values = evolve_f(a, &w, &v, t_max)?
            .iter()
            .map(|z| Ok(Complex::new(part(&z.re)?, part(&z.im)?)))
            .collect::<Result<Vec<_>, Error>>()?;
        TimeSeries::from_values("matrix", choice.clone(), a.precision(), values)
    }
    guard(|| {
        let m = &ref_arg(matrix, "matrix")?.0;
        let choice = vector_choice(vectors, seed);
        let series = with_matrix!(m, a => run(a, &choice, t_max))?;
        write_out(out, Box::into_raw(Box::new(PpSeries(series))), "out")
    })
}

/// Evolves a model, using the exponential action for `ehrenfest`.
///
/// # Safety
/// Pointers must be valid; `precision` may be null.
#[no_mangle]
pub unsafe extern "C" fn pp_model_evolve(
    model: *const PpModel,
    precision: *const c_char,
    vectors: PpVectors,
    seed: u64,
    t_max: u64,
    out: *mut *mut PpSeries,
) -> PpStatus {
    guard(|| {
        let spec = &ref_arg(model, "model")?.0;
        let precision = precision_arg(precision)?;
        let series = model_series(spec, &vector_choice(vectors, seed), precision, t_max)?;
        write_out(out, Box::into_raw(Box::new(PpSeries(series))), "out")
    })
}

/// Exact closed-form boom-bust series for the block model with special
/// vectors. `g` is a rational such as `"3/2"` or `"2"`.
///
/// # Safety
/// `g` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pp_closed_form(n: usize, g: *const c_char, t_max: u64, out: *mut *mut PpSeries) -> PpStatus {
    guard(|| {
        let g: ScalarParam = str_arg(g, "g")?.parse()?;
        let values = (0..=t_max)
            .map(|t| Ok(Complex::new(closed_form_f(n, g.value(), t)?, Rational::new())))
            .collect::<Result<Vec<_>, Error>>()?;
        let model = ModelSpec::block_transfer(n, g.value().clone()).describe();
        let series = TimeSeries::from_values(model, VectorChoice::Special, Precision::Exact, values)?;
        write_out(out, Box::into_raw(Box::new(PpSeries(series))), "out")
    })
}

/// # Safety
/// `series` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn pp_series_free(series: *mut PpSeries) {
    if !series.is_null() {
        drop(Box::from_raw(series));
    }
}

/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn pp_series_len(series: *const PpSeries, len: *mut usize) -> PpStatus {
    guard(|| write_out(len, ref_arg(series, "series")?.0.len(), "len"))
}

/// Sample `index` as `(t, re, im)` rounded to double precision.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn pp_series_sample(
    series: *const PpSeries,
    index: usize,
    t: *mut u64,
    re: *mut f64,
    im: *mut f64,
) -> PpStatus {
    guard(|| {
        let s = &ref_arg(series, "series")?.0;
        let (time, z) = s.samples().get(index).ok_or_else(|| {
            Error::DimensionMismatch(format!("sample {index} outside a series of length {}", s.len()))
        })?;
        write_out(t, *time, "t")?;
        write_out(re, z.re.to_f64(), "re")?;
        write_out(im, z.im.to_f64(), "im")
    })
}

/// Sample `index` as exact `p/q` strings.
///
/// # Safety
/// Pointers must be valid; free both strings with [`pp_string_free`].
#[no_mangle]
pub unsafe extern "C" fn pp_series_sample_exact(
    series: *const PpSeries,
    index: usize,
    re: *mut *mut c_char,
    im: *mut *mut c_char,
) -> PpStatus {
    guard(|| {
        let s = &ref_arg(series, "series")?.0;
        let (_, z) = s.samples().get(index).ok_or_else(|| {
            Error::DimensionMismatch(format!("sample {index} outside a series of length {}", s.len()))
        })?;
        if re.is_null() || im.is_null() {
            return Err(Failure::Null("re/im"));
        }
        write_out(re, into_c_string(z.re.to_exact_string()), "re")?;
        write_out(im, into_c_string(z.im.to_exact_string()), "im")
    })
}

/// Renders the series as CSV with `digits` significant digits and exact
/// `re_exact,im_exact` columns.
///
/// # Safety
/// Pointers must be valid; free the result with [`pp_string_free`].
#[no_mangle]
pub unsafe extern "C" fn pp_series_to_csv(series: *const PpSeries, digits: usize, out: *mut *mut c_char) -> PpStatus {
    guard(|| {
        let opts = CsvOptions {
            digits: digits.max(1),
            exact_columns: true,
            reference: None,
        };
        let text = ref_arg(series, "series")?.0.to_csv(&opts)?;
        write_out(out, into_c_string(text), "out")
    })
}

/// Least-squares slope and intercept of `ln|f(t)|` over `t0..=t1`.
/// Exact zeros are skipped when `exclude_zeros` is nonzero.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn pp_series_fit(
    series: *const PpSeries,
    t0: u64,
    t1: u64,
    exclude_zeros: bool,
    slope: *mut f64,
    intercept: *mut f64,
) -> PpStatus {
    guard(|| {
        let report = growth_rate_fit(&ref_arg(series, "series")?.0, t0, t1, exclude_zeros)?;
        write_out(slope, report.slope, "slope")?;
        write_out(intercept, report.intercept, "intercept")
    })
}
