//! Pseudospectrum level maps `log₁₀ s_min(zI − A)`, analytic symbol curves
//! and the largest pseudoeigenvalue of the analytic families.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::complex::Complex;
use crate::error::{Error, Result};
use crate::linalg::{smallest_singular_value, SvdOptions};
use crate::matrix::Matrix;
use crate::models::{Family, ModelSpec};
use crate::scalar::FloatField;

/// Levels below this are flagged when the map is computed in double precision.
pub const MACHINE_RELIABLE_LEVEL: f64 = -14.0;

/// Rectangular grid of `nx × ny` nodes including the corners.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
    pub nx: usize,
    pub ny: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            re_min: -3.0,
            re_max: 3.0,
            im_min: -3.0,
            im_max: 3.0,
            nx: 241,
            ny: 241,
        }
    }
}

fn node(lo: f64, hi: f64, count: usize, k: usize) -> f64 {
    if count == 1 {
        return 0.5 * (lo + hi);
    }
    // Weighted form: a grid symmetric about zero yields exactly mirrored nodes.
    let last = (count - 1) as f64;
    (lo * (last - k as f64) + hi * k as f64) / last
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        let finite = [self.re_min, self.re_max, self.im_min, self.im_max]
            .iter()
            .all(|x| x.is_finite());
        if !finite {
            return Err(Error::invalid("grid bounds must be finite"));
        }
        if self.re_min >= self.re_max || self.im_min >= self.im_max {
            return Err(Error::invalid(format!(
                "grid bounds must satisfy re-min < re-max and im-min < im-max, got [{}, {}] x [{}, {}]",
                self.re_min, self.re_max, self.im_min, self.im_max
            )));
        }
        if self.nx == 0 || self.ny == 0 {
            return Err(Error::invalid("grid needs at least one node per axis"));
        }
        Ok(())
    }

    pub fn re(&self, i: usize) -> f64 {
        node(self.re_min, self.re_max, self.nx, i)
    }

    pub fn im(&self, j: usize) -> f64 {
        node(self.im_min, self.im_max, self.ny, j)
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Per-node outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum NodeFlag {
    Ok,
    /// `s_min` is exactly zero at working precision; the level is `-inf`.
    Underflow,
    /// Below the resolution of double precision.
    Unreliable,
    /// The singular value solver failed; the level is `NaN`.
    Failed,
}

/// `log₁₀ s_min(zI − A)` over a grid; `levels[i][j]` belongs to
/// `z = re(i) + i·im(j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PseudospectrumMap {
    pub grid: GridSpec,
    pub matrix_id: String,
    pub levels: Vec<Vec<f64>>,
    pub flags: Vec<Vec<NodeFlag>>,
}

impl PseudospectrumMap {
    pub fn level(&self, i: usize, j: usize) -> f64 {
        self.levels[i][j]
    }

    pub fn flagged(&self) -> usize {
        self.flags.iter().flatten().filter(|f| **f != NodeFlag::Ok).count()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("re,im,log10_smin\n");
        for i in 0..self.grid.nx {
            for j in 0..self.grid.ny {
                writeln!(out, "{:e},{:e},{:e}", self.grid.re(i), self.grid.im(j), self.levels[i][j])
                    .expect("write to string");
            }
        }
        out
    }

    pub fn to_json(&self) -> Value {
        let levels: Vec<Vec<Value>> = self
            .levels
            .iter()
            .map(|row| {
                row.iter()
                    .map(|x| if x.is_finite() { json!(x) } else { Value::Null })
                    .collect()
            })
            .collect();
        json!({
            "matrix_id": self.matrix_id,
            "grid": self.grid,
            "levels": levels,
            "flags": self.flags,
        })
    }
}

/// Evaluates `log₁₀ s_min(zI − a)` at every grid node, in parallel on the
/// current rayon pool. Each node is computed independently, so the result
/// does not depend on scheduling. Solver failures flag the node instead of
/// aborting the map.
pub fn smin_map<T: FloatField>(
    a: &Matrix<T>,
    grid: &GridSpec,
    matrix_id: &str,
    opts: &SvdOptions,
) -> Result<PseudospectrumMap> {
    a.require_square()?;
    grid.validate()?;
    let ctx = a.ctx();
    let machine = T::mantissa_bits(ctx) <= 53;
    let cells: Vec<(f64, NodeFlag)> = (0..grid.len())
        .into_par_iter()
        .map(|k| {
            let (i, j) = (k / grid.ny, k % grid.ny);
            let z = Complex::from_f64_pair(grid.re(i), grid.im(j), ctx);
            let smin = a.shifted_from(&z).and_then(|m| smallest_singular_value(&m, opts));
            match smin {
                Ok(s) if s.is_zero() => (f64::NEG_INFINITY, NodeFlag::Underflow),
                Ok(s) => {
                    let level = s.log2_abs() * std::f64::consts::LOG10_2;
                    let flag = if machine && level < MACHINE_RELIABLE_LEVEL {
                        NodeFlag::Unreliable
                    } else {
                        NodeFlag::Ok
                    };
                    (level, flag)
                }
                Err(_) => (f64::NAN, NodeFlag::Failed),
            }
        })
        .collect();
    let mut levels = Vec::with_capacity(grid.nx);
    let mut flags = Vec::with_capacity(grid.nx);
    for row in cells.chunks(grid.ny) {
        levels.push(row.iter().map(|c| c.0).collect());
        flags.push(row.iter().map(|c| c.1).collect());
    }
    Ok(PseudospectrumMap {
        grid: *grid,
        matrix_id: matrix_id.to_string(),
        levels,
        flags,
    })
}

/// Analytic boundary curves of the infinite-size pseudospectra.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum CurveFamily {
    /// `g e^{−iφ} + g⁻¹ e^{iφ}`, the symbol of the Toeplitz block.
    EllipseB,
    /// `g e^{iφ}` and `g⁻¹ e^{−iφ}`.
    CirclesA,
    /// Radius `r` for the generator `iαH` and `e^{r}` for `exp(iαH)`.
    CircleEhrenfest,
}

/// Sampled curve branches at `φ_k = 2πk/samples`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolCurve<T: FloatField> {
    pub family: CurveFamily,
    pub phi: Vec<T>,
    pub branches: Vec<Vec<Complex<T>>>,
}

impl<T: FloatField> SymbolCurve<T> {
    /// `phi,re,im` rows; branches are separated by `# branch k` lines.
    pub fn to_csv(&self, digits: usize) -> String {
        let mut out = String::from("phi,re,im\n");
        for (b, branch) in self.branches.iter().enumerate() {
            writeln!(out, "# branch {b}").expect("write to string");
            for (phi, z) in self.phi.iter().zip(branch) {
                writeln!(
                    out,
                    "{},{},{}",
                    phi.to_decimal(digits),
                    z.re.to_decimal(digits),
                    z.im.to_decimal(digits)
                )
                .expect("write to string");
            }
        }
        out
    }
}

/// Samples an analytic curve. `parameter` is `g` for the Toeplitz families
/// and the radius `αN` (`π/2` by default) for the Ehrenfest circle.
pub fn symbol_curve<T: FloatField>(
    family: CurveFamily,
    parameter: &T,
    samples: usize,
) -> Result<SymbolCurve<T>> {
    if samples == 0 {
        return Err(Error::invalid("a curve needs at least one sample"));
    }
    let ctx = parameter.ctx();
    if !parameter.is_finite() || *parameter <= T::zero(ctx) {
        return Err(Error::invalid("curve parameter must be positive"));
    }
    let two_pi = T::pi(ctx) * T::from_i64(2, ctx);
    let phi: Vec<T> = (0..samples)
        .map(|k| two_pi.clone() * T::from_i64(k as i64, ctx) / T::from_i64(samples as i64, ctx))
        .collect();
    let p = parameter.clone();
    let inv = T::one(ctx) / p.clone();
    let circle = |r: &T, sign: i64| -> Vec<Complex<T>> {
        phi.iter()
            .map(|f| Complex::from_polar(r.clone(), &(f.clone() * T::from_i64(sign, ctx))))
            .collect()
    };
    let branches = match family {
        CurveFamily::EllipseB => vec![phi
            .iter()
            .map(|f| {
                Complex::from_polar(p.clone(), &-f.clone()) + Complex::from_polar(inv.clone(), f)
            })
            .collect()],
        CurveFamily::CirclesA => vec![circle(&p, 1), circle(&inv, -1)],
        CurveFamily::CircleEhrenfest => vec![circle(&p, 1), circle(&p.exp(), 1)],
    };
    Ok(SymbolCurve {
        family,
        phi,
        branches,
    })
}

/// Modulus of the largest pseudoeigenvalue of an analytic family:
/// `g` for the block transfer matrix, `g + 1/g` for the Toeplitz block,
/// `e^{αN}` for `exp(iαH)` (`e^{π/2}` at the default step) and
/// `max(g, 1/g)` for the tilted Pauli matrix.
pub fn largest_pseudoeigenvalue<T: FloatField>(spec: &ModelSpec, ctx: T::Ctx) -> Result<T> {
    let g = || spec.g().to_field::<T>(ctx);
    match spec.family()? {
        Family::BlockTransfer => Ok(g()),
        Family::ToeplitzB => {
            let g = g();
            Ok(g.clone() + T::one(ctx) / g)
        }
        Family::Ehrenfest => {
            let n = spec
                .dimension()
                .ok_or_else(|| Error::invalid("ehrenfest model needs n"))?;
            Ok((spec.alpha::<T>(ctx)? * T::from_i64(n as i64, ctx)).exp())
        }
        Family::TiltedPauli => {
            let g = g();
            let inv = T::one(ctx) / g.clone();
            Ok(T::max_of(g, inv))
        }
        other => Err(Error::UnsupportedBackend {
            backend: other.name().to_string(),
            what: "largest pseudoeigenvalue (no analytic pseudospectrum)",
        }),
    }
}
