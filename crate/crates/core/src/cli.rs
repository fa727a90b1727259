//! Command-line front end.
//!
//! Every command writes plot-ready CSV (or JSON with `--format json`) to
//! `--out` or standard output. CSV outputs begin with `# key: value`
//! provenance lines; `--no-timestamp` drops the only non-deterministic one.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::SystemTime;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rug::{Float, Rational};
use serde_json::{json, Map, Value};

use crate::backend::DynMatrix;
use crate::dynamics::{
    default_fit_window, evolve_with, growth_rate_fit, make_vectors, model_propagator, model_series, norm_bounds_track,
    CompressedRows, CsvOptions, Propagator, TimeSeries, VectorChoice,
};
use crate::error::{Error, Result};
use crate::linalg::SvdOptions;
use crate::models::{Family, ModelSpec, ScalarParam};
use crate::precision::{Precision, PRECISION_ENV_VAR};
use crate::pseudospectrum::{largest_pseudoeigenvalue, smin_map, symbol_curve, CurveFamily, GridSpec};
use crate::scalar::{Field, FloatField};
use crate::spectral::{analytic_eigensystem, closed_form_f, eigen_ehrenfest, EigenSystem, FourierCoefficients};
use crate::complex::Complex;

/// Default backend of the pseudospectrum command when none is requested.
pub const PSEUDOSPECTRUM_DEFAULT: Precision = Precision::BigFloat { bits: 128 };

#[derive(Debug, Parser)]
#[command(name = "pseudopower", version, about = "Powers of non-normal roots of the identity")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalArgs {
    /// Arithmetic backend: exact, big:<bits> or machine.
    #[arg(long, global = true, env = PRECISION_ENV_VAR)]
    pub precision: Option<Precision>,
    /// Seed of the random-vector generator.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output file (standard output when absent).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Worker threads for parallel sections.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Omit the generation time from outputs.
    #[arg(long, global = true)]
    pub no_timestamp: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// Model selection shared by the model-based commands.
#[derive(Debug, Clone, Default, Args)]
pub struct ModelArgs {
    #[arg(long, value_enum)]
    pub family: Option<Family>,
    /// Matrix size (Toeplitz size for toeplitz-b).
    #[arg(long)]
    pub n: Option<usize>,
    /// Tilt parameter; `p/q` or an integer keeps it exact.
    #[arg(long)]
    pub g: Option<ScalarParam>,
    /// Ehrenfest time step (default pi/(2n)).
    #[arg(long)]
    pub alpha: Option<ScalarParam>,
    #[arg(long)]
    pub energy: Option<ScalarParam>,
    #[arg(long)]
    pub onsite: Option<PathBuf>,
    #[arg(long)]
    pub hopping: Option<PathBuf>,
    /// Matrix JSON file; selects the external-file family.
    #[arg(long)]
    pub matrix_file: Option<PathBuf>,
    /// Model JSON file; flags given alongside override its fields.
    #[arg(long)]
    pub model: Option<PathBuf>,
}

impl ModelArgs {
    pub fn to_spec(&self) -> Result<ModelSpec> {
        let mut spec = match &self.model {
            Some(path) => ModelSpec::load(path)?,
            None => ModelSpec::default(),
        };
        if let Some(path) = &self.matrix_file {
            if self.family.is_some_and(|f| f != Family::ExternalFile) {
                return Err(Error::invalid("--matrix-file conflicts with --family"));
            }
            spec.family = Some(Family::ExternalFile);
            spec.path = Some(path.clone());
        }
        if self.family.is_some() {
            spec.family = self.family;
        }
        macro_rules! take {
            ($($field:ident),*) => {$(
                if self.$field.is_some() {
                    spec.$field = self.$field.clone();
                }
            )*};
        }
        take!(n, g, alpha, energy, onsite, hopping);
        spec.family()?;
        Ok(spec)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VectorKind {
    Special,
    Random,
    Explicit,
}

#[derive(Debug, Clone, Args)]
pub struct VectorArgs {
    #[arg(long, value_enum, default_value_t = VectorKind::Special)]
    pub vectors: VectorKind,
    /// Bra vector file for explicit vectors.
    #[arg(long)]
    pub w: Option<PathBuf>,
    /// Ket vector file for explicit vectors.
    #[arg(long)]
    pub v: Option<PathBuf>,
}

impl VectorArgs {
    fn choice(&self, seed: Option<u64>) -> Result<VectorChoice> {
        Ok(match self.vectors {
            VectorKind::Special => VectorChoice::Special,
            VectorKind::Random => VectorChoice::Random { seed: seed.unwrap_or(0) },
            VectorKind::Explicit => match (&self.w, &self.v) {
                (Some(w), Some(v)) => VectorChoice::Explicit { w: w.clone(), v: v.clone() },
                _ => return Err(Error::invalid("explicit vectors need --w and --v files")),
            },
        })
    }
}

#[derive(Debug, Clone, Args)]
pub struct GridArgs {
    #[arg(long, default_value_t = -3.0, allow_hyphen_values = true)]
    pub re_min: f64,
    #[arg(long, default_value_t = 3.0, allow_hyphen_values = true)]
    pub re_max: f64,
    #[arg(long, default_value_t = -3.0, allow_hyphen_values = true)]
    pub im_min: f64,
    #[arg(long, default_value_t = 3.0, allow_hyphen_values = true)]
    pub im_max: f64,
    #[arg(long, default_value_t = 241)]
    pub nx: usize,
    #[arg(long, default_value_t = 241)]
    pub ny: usize,
}

impl GridArgs {
    fn spec(&self) -> GridSpec {
        GridSpec {
            re_min: self.re_min,
            re_max: self.re_max,
            im_min: self.im_min,
            im_max: self.im_max,
            nx: self.nx,
            ny: self.ny,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a model matrix as JSON.
    Make {
        #[command(flatten)]
        model: ModelArgs,
        /// For ehrenfest, write exp(i alpha H) instead of H.
        #[arg(long)]
        evolution: bool,
    },
    /// Time series f(t) = <w|A^t|v>.
    Evolve {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        vectors: VectorArgs,
        #[arg(long)]
        t_max: Option<u64>,
        /// Significant digits of decimal columns.
        #[arg(long, default_value_t = 17)]
        digits: usize,
        /// Add lossless re_exact,im_exact columns.
        #[arg(long)]
        exact_columns: bool,
        /// Compare with the closed form in float backends too.
        #[arg(long)]
        compare_closed_form: bool,
    },
    /// Eigenvalues of an analytic family (the generator H for ehrenfest).
    Spectrum {
        #[command(flatten)]
        model: ModelArgs,
        /// Add eigenvalue condition numbers.
        #[arg(long)]
        kappa: bool,
        #[arg(long, default_value_t = 17)]
        digits: usize,
    },
    /// log10 s_min(zI - A) on a grid, plus analytic overlay curves.
    Pseudospectrum {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long, default_value_t = 720)]
        curve_samples: usize,
        /// Overlay curve file (default: next to --out with a .curves.csv suffix).
        #[arg(long)]
        curves_out: Option<PathBuf>,
    },
    /// Least-squares growth rate of ln|f(t)|.
    Fit {
        /// Series file written by `evolve`; otherwise the model is evolved.
        #[arg(long)]
        series: Option<PathBuf>,
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        vectors: VectorArgs,
        #[arg(long)]
        t_max: Option<u64>,
        #[arg(long)]
        t0: Option<u64>,
        #[arg(long)]
        t1: Option<u64>,
        /// Drop exact zeros from the window instead of failing.
        #[arg(long)]
        exclude_zeros: bool,
    },
    /// Tracks of ||A^t||, rho^t, ||A||^t and kappa rho^t.
    Bounds {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        t_max: Option<u64>,
        #[arg(long, default_value_t = 17)]
        digits: usize,
    },
    /// Exact special-vector series of the block transfer matrix.
    ClosedForm {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value = "2")]
        g: ScalarParam,
        #[arg(long)]
        t_max: Option<u64>,
        #[arg(long, default_value_t = 17)]
        digits: usize,
    },
    /// Fourier coefficients c_k of the special-vector series.
    Fourier {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value = "2")]
        g: ScalarParam,
        #[arg(long, default_value_t = 17)]
        digits: usize,
    },
}

/// Process exit code for an error: 2 validation, 3 numerics, 4 I/O.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Singular { .. } | Error::NonConvergence { .. } | Error::ToleranceUnreachable { .. } => 3,
        Error::Io(_) => 4,
        _ => 2,
    }
}

/// Ordered `key: value` provenance entries.
struct Provenance(Vec<(String, String)>);

impl Provenance {
    fn new(command: &str, global: &GlobalArgs) -> Self {
        let mut p = Provenance(Vec::new());
        p.push("tool", format!("pseudopower {}", env!("CARGO_PKG_VERSION")));
        p.push("command", command);
        if !global.no_timestamp {
            p.push("generated", humantime::format_rfc3339_seconds(SystemTime::now()));
        }
        p
    }

    fn push(&mut self, key: &str, value: impl ToString) {
        self.0.push((key.to_string(), value.to_string()));
    }

    fn csv(&self) -> String {
        self.0.iter().map(|(k, v)| format!("# {k}: {v}\n")).collect()
    }

    fn json(&self) -> Value {
        Value::Object(self.0.iter().map(|(k, v)| (k.clone(), json!(v))).collect::<Map<_, _>>())
    }
}

fn emit(global: &GlobalArgs, text: &str) -> Result<()> {
    write_to(global.out.as_deref(), text)
}

fn write_to(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(path) => std::fs::write(path, text)?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
        }
    }
    Ok(())
}

fn json_text(value: &Value) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

/// Runs a parsed command line.
pub fn run(cli: &Cli) -> Result<()> {
    if let Some(threads) = cli.global.threads {
        if threads == 0 {
            return Err(Error::invalid("--threads must be positive"));
        }
        // Fails only when a pool already exists, e.g. on a second call in-process.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    }
    let g = &cli.global;
    match &cli.command {
        Command::Make { model, evolution } => cmd_make(g, model, *evolution),
        Command::Evolve {
            model,
            vectors,
            t_max,
            digits,
            exact_columns,
            compare_closed_form,
        } => {
            let opts = EvolveOptions {
                t_max: *t_max,
                digits: *digits,
                exact_columns: *exact_columns,
                compare: *compare_closed_form,
            };
            cmd_evolve(g, model, vectors, &opts)
        }
        Command::Spectrum { model, kappa, digits } => cmd_spectrum(g, model, *kappa, *digits),
        Command::Pseudospectrum {
            model,
            grid,
            curve_samples,
            curves_out,
        } => cmd_pseudospectrum(g, model, &grid.spec(), *curve_samples, curves_out.as_deref()),
        Command::Fit {
            series,
            model,
            vectors,
            t_max,
            t0,
            t1,
            exclude_zeros,
        } => cmd_fit(g, series.as_deref(), model, vectors, *t_max, (*t0, *t1), *exclude_zeros),
        Command::Bounds { model, t_max, digits } => cmd_bounds(g, model, *t_max, *digits),
        Command::ClosedForm { n, g: tilt, t_max, digits } => cmd_closed_form(g, *n, tilt, *t_max, *digits),
        Command::Fourier { n, g: tilt, digits } => cmd_fourier(g, *n, tilt, *digits),
    }
}

fn precision_or(global: &GlobalArgs, fallback: Precision) -> Precision {
    global.precision.unwrap_or(fallback)
}

fn float_only(precision: Precision, what: &'static str) -> Result<()> {
    if precision.is_exact() {
        return Err(Error::UnsupportedBackend {
            backend: precision.to_string(),
            what,
        });
    }
    Ok(())
}

fn cmd_make(global: &GlobalArgs, model: &ModelArgs, evolution: bool) -> Result<()> {
    let spec = model.to_spec()?;
    let precision = precision_or(global, Precision::default());
    spec.validate(precision)?;
    let matrix = if evolution && spec.family()? == Family::Ehrenfest {
        float_only(precision, "exp(i alpha H) is irrational")?;
        match precision {
            Precision::Machine => DynMatrix::Machine(spec.evolution_matrix::<f64>(())?),
            Precision::BigFloat { bits } => DynMatrix::Big(spec.evolution_matrix::<Float>(bits)?),
            Precision::Exact => unreachable!(),
        }
    } else {
        DynMatrix::build(&spec, precision)?
    };
    let mut prov = Provenance::new("make", global);
    prov.push("model", spec.describe());
    prov.push("precision", precision);
    prov.push("size", format!("{}x{}", matrix.rows(), matrix.cols()));
    eprint!("{}", prov.csv());
    emit(global, &matrix.to_json()?)
}

struct EvolveOptions {
    t_max: Option<u64>,
    digits: usize,
    exact_columns: bool,
    compare: bool,
}

fn default_t_max(spec: &ModelSpec) -> u64 {
    let n = spec.n.unwrap_or(2) as u64;
    match spec.family {
        Some(Family::BlockTransfer) => 2 * (n + 2),
        Some(Family::ToeplitzB) => 2 * (n + 1),
        Some(Family::Ehrenfest) => 4 * n,
        Some(Family::TiltedPauli) => 8,
        _ => 200,
    }
}

/// Exact series reference for special vectors on the block transfer matrix.
fn closed_form_reference<T: Field>(spec: &ModelSpec, ctx: T::Ctx, t_max: u64) -> Result<Vec<T>> {
    let n = spec.n.unwrap_or(0);
    let g = spec.g().to_field::<T>(ctx);
    (0..=t_max).map(|t| closed_form_f(n, &g, t)).collect()
}

fn series_for<T: Field>(
    prop: &dyn Propagator<T>,
    spec: &ModelSpec,
    choice: &VectorChoice,
    precision: Precision,
    t_max: u64,
    ctx: T::Ctx,
) -> Result<TimeSeries<T>> {
    let (w, v) = make_vectors::<T>(choice, prop.dim(), ctx)?;
    let values = evolve_with(prop, &w, &v, t_max)?;
    TimeSeries::from_values(spec.describe(), choice.clone(), precision, values)
}

fn render_series<T: Field>(
    global: &GlobalArgs,
    mut prov: Provenance,
    series: &TimeSeries<T>,
    spec: &ModelSpec,
    opts: &EvolveOptions,
    reference_wanted: bool,
) -> Result<String> {
    let reference = if reference_wanted {
        Some(closed_form_reference::<T>(spec, series.samples()[0].1.ctx(), series.last_t())?)
    } else {
        None
    };
    prov.push("model", &series.model);
    prov.push("vectors", &series.vectors);
    prov.push("precision", series.precision);
    prov.push("t_max", series.last_t());
    match global.format {
        Format::Csv => {
            let csv = series.to_csv(&CsvOptions {
                digits: opts.digits,
                exact_columns: opts.exact_columns,
                reference,
            })?;
            Ok(prov.csv() + &csv)
        }
        Format::Json => {
            let mut doc = json!({"provenance": prov.json(), "series": series.to_json()});
            if let Some(r) = reference {
                doc["closed_form"] = json!(r.iter().map(Field::to_exact_string).collect::<Vec<_>>());
                doc["max_deviation"] = json!(series.max_deviation(&r)?);
            }
            json_text(&doc)
        }
    }
}

fn cmd_evolve(global: &GlobalArgs, model: &ModelArgs, vectors: &VectorArgs, opts: &EvolveOptions) -> Result<()> {
    let spec = model.to_spec()?;
    let precision = precision_or(global, Precision::default());
    spec.validate(precision)?;
    let choice = vectors.choice(global.seed)?;
    let t_max = opts.t_max.unwrap_or_else(|| default_t_max(&spec));
    if t_max == 0 {
        return Err(Error::invalid("--t-max must be at least 1"));
    }
    let reference = choice == VectorChoice::Special
        && spec.family()? == Family::BlockTransfer
        && (precision.is_exact() || opts.compare);
    let prov = Provenance::new("evolve", global);
    let text = match precision {
        Precision::Exact => {
            if spec.family()? == Family::Ehrenfest {
                return Err(Error::UnsupportedBackend {
                    backend: precision.to_string(),
                    what: "exp(i alpha H) has irrational entries",
                });
            }
            let a = spec.build::<Rational>(())?;
            let prop = CompressedRows::from_matrix(&a)?;
            let s = series_for(&prop, &spec, &choice, precision, t_max, ())?;
            render_series(global, prov, &s, &spec, opts, reference)?
        }
        Precision::BigFloat { bits } => {
            let prop = model_propagator::<Float>(&spec, bits)?;
            let s = series_for(prop.as_ref(), &spec, &choice, precision, t_max, bits)?;
            render_series(global, prov, &s, &spec, opts, reference)?
        }
        Precision::Machine => {
            let prop = model_propagator::<f64>(&spec, ())?;
            let s = series_for(prop.as_ref(), &spec, &choice, precision, t_max, ())?;
            render_series(global, prov, &s, &spec, opts, reference)?
        }
    };
    emit(global, &text)
}

fn spectrum_table<T: FloatField>(es: &EigenSystem<T>, with_kappa: bool, digits: usize) -> Result<(String, Value)> {
    let kappa = if with_kappa { Some(es.condition_numbers()?) } else { None };
    let mut csv = String::from(if with_kappa { "index,re,im,kappa\n" } else { "index,re,im\n" });
    let mut rows = Vec::new();
    for (j, z) in es.eigenvalues.iter().enumerate() {
        write!(csv, "{j},{},{}", z.re.to_decimal(digits), z.im.to_decimal(digits)).expect("write to string");
        let mut row = json!({"index": j, "re": z.re.to_exact_string(), "im": z.im.to_exact_string()});
        if let Some(k) = &kappa {
            write!(csv, ",{}", k[j].to_decimal(digits)).expect("write to string");
            row["kappa"] = json!(k[j].to_exact_string());
        }
        csv.push('\n');
        rows.push(row);
    }
    Ok((csv, Value::Array(rows)))
}

fn cmd_spectrum(global: &GlobalArgs, model: &ModelArgs, kappa: bool, digits: usize) -> Result<()> {
    let spec = model.to_spec()?;
    let family = spec.family()?;
    if !family.is_analytic() {
        return Err(Error::invalid(format!("no analytic spectrum for the {family} family")));
    }
    let precision = precision_or(global, Precision::default());
    spec.validate(precision)?;
    let (csv, rows) = match precision {
        Precision::Exact => {
            if family != Family::Ehrenfest || kappa {
                return Err(Error::UnsupportedBackend {
                    backend: precision.to_string(),
                    what: "spectra with irrational entries",
                });
            }
            let es = eigen_ehrenfest(spec.n.unwrap_or(0))?;
            let mut csv = String::from("index,re,im\n");
            let mut rows = Vec::new();
            for (j, z) in es.eigenvalues.iter().enumerate() {
                writeln!(csv, "{j},{},{}", z.re, z.im).expect("write to string");
                rows.push(json!({"index": j, "re": z.re.to_string(), "im": z.im.to_string()}));
            }
            (csv, Value::Array(rows))
        }
        Precision::BigFloat { bits } => spectrum_table(&analytic_eigensystem::<Float>(&spec, bits)?, kappa, digits)?,
        Precision::Machine => spectrum_table(&analytic_eigensystem::<f64>(&spec, ())?, kappa, digits)?,
    };
    let mut prov = Provenance::new("spectrum", global);
    prov.push("model", spec.describe());
    prov.push("precision", precision);
    if family == Family::Ehrenfest {
        prov.push("operator", "generator H");
    }
    let text = match global.format {
        Format::Csv => prov.csv() + &csv,
        Format::Json => json_text(&json!({"provenance": prov.json(), "eigenvalues": rows}))?,
    };
    emit(global, &text)
}

fn overlay_for<T: FloatField>(spec: &ModelSpec, ctx: T::Ctx) -> Result<Option<(CurveFamily, T)>> {
    Ok(match spec.family()? {
        Family::BlockTransfer => Some((CurveFamily::CirclesA, spec.g().to_field(ctx))),
        Family::ToeplitzB => Some((CurveFamily::EllipseB, spec.g().to_field(ctx))),
        Family::Ehrenfest => {
            let n = T::from_i64(spec.n.unwrap_or(0) as i64, ctx);
            Some((CurveFamily::CircleEhrenfest, spec.alpha::<T>(ctx)? * n))
        }
        _ => None,
    })
}

fn curves_path(global: &GlobalArgs, explicit: Option<&Path>) -> Option<PathBuf> {
    explicit.map(Path::to_path_buf).or_else(|| {
        global.out.as_ref().map(|out| {
            let stem = out.file_stem().map_or_else(|| "map".into(), |s| s.to_string_lossy().into_owned());
            out.with_file_name(format!("{stem}.curves.csv"))
        })
    })
}

fn pseudospectrum_in<T: FloatField>(
    global: &GlobalArgs,
    spec: &ModelSpec,
    grid: &GridSpec,
    samples: usize,
    curves_out: Option<&Path>,
    precision: Precision,
    ctx: T::Ctx,
) -> Result<()> {
    grid.validate()?;
    let a = spec.evolution_matrix::<T>(ctx)?;
    let id = format!("{} @ {precision}", spec.describe());
    let map = smin_map(&a, grid, &id, &SvdOptions::default())?;
    let overlay = match overlay_for::<T>(spec, ctx)? {
        Some((family, p)) => Some(symbol_curve(family, &p, samples)?),
        None => None,
    };
    let mut prov = Provenance::new("pseudospectrum", global);
    prov.push("model", spec.describe());
    prov.push("precision", precision);
    prov.push("grid", format!("[{}, {}] x [{}, {}], {} x {}", grid.re_min, grid.re_max, grid.im_min, grid.im_max, grid.nx, grid.ny));
    prov.push("flagged_nodes", map.flagged());
    if spec.family()?.is_analytic() {
        prov.push("largest_pseudoeigenvalue", largest_pseudoeigenvalue::<T>(spec, ctx)?.to_decimal(17));
    }
    match global.format {
        Format::Csv => {
            emit(global, &(prov.csv() + &map.to_csv()))?;
            if let Some(curve) = overlay {
                match curves_path(global, curves_out) {
                    Some(path) => write_to(Some(&path), &(prov.csv() + &curve.to_csv(17)))?,
                    None => eprintln!("overlay curves not written: give --out or --curves-out"),
                }
            }
            Ok(())
        }
        Format::Json => {
            let mut doc = json!({"provenance": prov.json(), "map": map.to_json()});
            if let Some(curve) = overlay {
                let branches: Vec<Value> = curve
                    .branches
                    .iter()
                    .map(|b| json!(b.iter().map(|z| [z.re.to_f64(), z.im.to_f64()]).collect::<Vec<_>>()))
                    .collect();
                doc["curves"] = json!({"family": curve.family, "branches": branches});
            }
            emit(global, &json_text(&doc)?)
        }
    }
}

fn cmd_pseudospectrum(
    global: &GlobalArgs,
    model: &ModelArgs,
    grid: &GridSpec,
    samples: usize,
    curves_out: Option<&Path>,
) -> Result<()> {
    let spec = model.to_spec()?;
    let precision = precision_or(global, PSEUDOSPECTRUM_DEFAULT);
    float_only(precision, "singular values need a float backend")?;
    spec.validate(precision)?;
    grid.validate()?;
    match precision {
        Precision::BigFloat { bits } => pseudospectrum_in::<Float>(global, &spec, grid, samples, curves_out, precision, bits),
        _ => pseudospectrum_in::<f64>(global, &spec, grid, samples, curves_out, precision, ()),
    }
}

fn default_window(spec: &ModelSpec) -> Option<(u64, u64)> {
    match spec.family? {
        Family::BlockTransfer => spec.n.map(|n| default_fit_window(n as u64 / 2)),
        Family::Ehrenfest => Some((2, 20)),
        _ => None,
    }
}

/// Evolves a model into an exact-rational copy of its series, so fits see
/// one representation regardless of backend.
fn cmd_fit(
    global: &GlobalArgs,
    series_file: Option<&Path>,
    model: &ModelArgs,
    vectors: &VectorArgs,
    t_max: Option<u64>,
    window: (Option<u64>, Option<u64>),
    exclude_zeros: bool,
) -> Result<()> {
    let resolve = |fallback: Option<(u64, u64)>| match (window, fallback) {
        ((Some(t0), Some(t1)), _) => Ok((t0, t1)),
        ((t0, t1), Some((d0, d1))) => Ok((t0.unwrap_or(d0), t1.unwrap_or(d1))),
        _ => Err(Error::invalid("give the fit window with --t0 and --t1")),
    };
    let (series, (t0, t1)) = match series_file {
        Some(path) => (TimeSeries::<Rational>::parse(&std::fs::read_to_string(path)?)?, resolve(None)?),
        None => {
            let spec = model.to_spec()?;
            let precision = precision_or(global, Precision::default());
            spec.validate(precision)?;
            let (t0, t1) = resolve(default_window(&spec))?;
            let t_max = t_max.unwrap_or(t1).max(t1);
            (model_series(&spec, &vectors.choice(global.seed)?, precision, t_max)?, (t0, t1))
        }
    };
    let report = growth_rate_fit(&series, t0, t1, exclude_zeros)?;
    let mut prov = Provenance::new("fit", global);
    prov.push("model", &series.model);
    prov.push("vectors", &series.vectors);
    prov.push("precision", series.precision);
    let text = match global.format {
        Format::Csv => {
            let mut csv = prov.csv();
            csv.push_str("t0,t1,slope,intercept,residual,points,excluded_zeros\n");
            writeln!(
                csv,
                "{},{},{:e},{:e},{:e},{},{}",
                report.t0, report.t1, report.slope, report.intercept, report.residual, report.points, report.excluded_zeros
            )
            .expect("write to string");
            csv
        }
        Format::Json => json_text(&json!({"provenance": prov.json(), "fit": report}))?,
    };
    emit(global, &text)
}

fn bounds_in<T: FloatField>(spec: &ModelSpec, t_max: u64, digits: usize, ctx: T::Ctx) -> Result<(String, Value, usize)> {
    let a = spec.evolution_matrix::<T>(ctx)?;
    let mut es = analytic_eigensystem::<T>(spec, ctx)?;
    if spec.family()? == Family::Ehrenfest {
        let alpha = spec.alpha::<T>(ctx)?;
        es = es.map_eigenvalues(|z| Complex::cis(&(z.re.clone() * alpha.clone())));
    }
    let track = norm_bounds_track(&a, &es, t_max, &SvdOptions::default())?;
    let violations = track.violations(1e-8);
    let mut csv = track.to_csv(digits);
    writeln!(csv, "# kappa: {}", track.kappa.to_decimal(digits)).expect("write to string");
    writeln!(csv, "# violations: {}", violations.len()).expect("write to string");
    let rows: Vec<Value> = track
        .samples
        .iter()
        .map(|s| {
            json!({
                "t": s.t,
                "norm_At": s.norm_at.to_f64(),
                "rho_t": s.rho_t.to_f64(),
                "normA_pow_t": s.norm_a_pow_t.to_f64(),
                "kappa_rho_t": s.kappa_rho_t.to_f64(),
            })
        })
        .collect();
    let doc = json!({"kappa": track.kappa.to_f64(), "samples": rows, "violations": violations});
    Ok((csv, doc, violations.len()))
}

fn cmd_bounds(global: &GlobalArgs, model: &ModelArgs, t_max: Option<u64>, digits: usize) -> Result<()> {
    let spec = model.to_spec()?;
    let precision = precision_or(global, Precision::default());
    float_only(precision, "norm tracks need a float backend")?;
    spec.validate(precision)?;
    let t_max = t_max.unwrap_or_else(|| default_t_max(&spec));
    let (csv, doc, violations) = match precision {
        Precision::BigFloat { bits } => bounds_in::<Float>(&spec, t_max, digits, bits)?,
        _ => bounds_in::<f64>(&spec, t_max, digits, ())?,
    };
    if violations > 0 {
        eprintln!("warning: norm sandwich violated at {violations} sample(s)");
    }
    let mut prov = Provenance::new("bounds", global);
    prov.push("model", spec.describe());
    prov.push("precision", precision);
    let text = match global.format {
        Format::Csv => prov.csv() + &csv,
        Format::Json => json_text(&json!({"provenance": prov.json(), "bounds": doc}))?,
    };
    emit(global, &text)
}

fn closed_form_rows<T: Field>(n: usize, g: &T, t_max: u64, digits: usize) -> Result<(String, Vec<Value>)> {
    let mut csv = String::from("t,f\n");
    let mut rows = Vec::new();
    for t in 0..=t_max {
        let f = closed_form_f(n, g, t)?;
        let text = if T::EXACT { f.to_exact_string() } else { f.to_decimal(digits) };
        writeln!(csv, "{t},{text}").expect("write to string");
        rows.push(json!({"t": t, "f": f.to_exact_string()}));
    }
    Ok((csv, rows))
}

fn cmd_closed_form(global: &GlobalArgs, n: usize, g: &ScalarParam, t_max: Option<u64>, digits: usize) -> Result<()> {
    let spec = ModelSpec {
        g: Some(g.clone()),
        ..ModelSpec::block_transfer(n, Rational::from(2))
    };
    let precision = precision_or(global, Precision::Exact);
    spec.validate(precision)?;
    let t_max = t_max.unwrap_or(2 * (n as u64 + 2));
    let (csv, rows) = match precision {
        Precision::Exact => closed_form_rows(n, g.value(), t_max, digits)?,
        Precision::BigFloat { bits } => closed_form_rows(n, &g.to_field::<Float>(bits), t_max, digits)?,
        Precision::Machine => closed_form_rows(n, &g.to_f64(), t_max, digits)?,
    };
    let mut prov = Provenance::new("closed-form", global);
    prov.push("model", spec.describe());
    prov.push("precision", precision);
    let text = match global.format {
        Format::Csv => prov.csv() + &csv,
        Format::Json => json_text(&json!({"provenance": prov.json(), "values": rows}))?,
    };
    emit(global, &text)
}

fn fourier_rows<T: FloatField>(n: usize, g: &T, digits: usize) -> Result<(String, Value)> {
    let c = FourierCoefficients::new(n / 2, g)?;
    let mut csv = String::from("k,re,im,abs\n");
    let mut rows = Vec::new();
    let m = c.m as i64;
    for k in -m..=m {
        let z = c.get(k);
        writeln!(csv, "{k},{},{},{}", z.re.to_decimal(digits), z.im.to_decimal(digits), z.abs().to_decimal(digits))
            .expect("write to string");
        rows.push(json!({"k": k, "re": z.re.to_exact_string(), "im": z.im.to_exact_string()}));
    }
    let max_abs = c.max_abs();
    writeln!(csv, "# max_abs: {}", max_abs.to_decimal(digits)).expect("write to string");
    Ok((csv, json!({"coefficients": rows, "max_abs": max_abs.to_exact_string()})))
}

fn cmd_fourier(global: &GlobalArgs, n: usize, g: &ScalarParam, digits: usize) -> Result<()> {
    let spec = ModelSpec {
        g: Some(g.clone()),
        ..ModelSpec::block_transfer(n, Rational::from(2))
    };
    let precision = precision_or(global, Precision::default());
    float_only(precision, "Fourier coefficients are irrational")?;
    spec.validate(precision)?;
    let (csv, doc) = match precision {
        Precision::BigFloat { bits } => fourier_rows(n, &g.to_field::<Float>(bits), digits)?,
        _ => fourier_rows(n, &g.to_f64(), digits)?,
    };
    let mut prov = Provenance::new("fourier", global);
    prov.push("model", spec.describe());
    prov.push("precision", precision);
    let text = match global.format {
        Format::Csv => prov.csv() + &csv,
        Format::Json => json_text(&json!({"provenance": prov.json(), "fourier": doc}))?,
    };
    emit(global, &text)
}
