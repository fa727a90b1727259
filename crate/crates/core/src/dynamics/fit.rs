//! Periodicity checks and exponential rate fits on time series.

use rug::Float;
use serde::Serialize;

use super::{abs_big, TimeSeries};
use crate::error::{Error, Result};
use crate::scalar::Field;

/// Outcome of comparing `f(t + T)` with `f(t)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PeriodicityReport {
    pub period: u64,
    /// Number of `t` with both `t` and `t + T` sampled.
    pub compared: usize,
    /// `max |f(t+T) − f(t)|`.
    pub max_deviation: f64,
    /// `max |f(t+T) + f(t)|`.
    pub max_antiperiodic_deviation: f64,
    /// `max ||f(t+T)| − |f(t)||`.
    pub max_modulus_deviation: f64,
    /// Modulus deviation relative to `max |f|` over the series.
    pub relative_modulus_deviation: f64,
    pub periodic_exactly: bool,
    pub antiperiodic_exactly: bool,
    /// `(t, ln|f(t)|)` of the largest `|f|` in each full period, counted
    /// from the first sample.
    pub peaks: Vec<(u64, f64)>,
}

fn to_f64(x: &Float) -> f64 {
    x.to_f64()
}

/// Compares `f(t + period)` with `f(t)` over every sampled pair.
///
/// Differences are evaluated in a big float wide enough for the backend, so
/// exact-rational series report zero only when values coincide.
pub fn periodicity_check<T: Field>(series: &TimeSeries<T>, period: u64) -> Result<PeriodicityReport> {
    if period == 0 {
        return Err(Error::invalid("period must be positive"));
    }
    let span = series.last_t() - series.first_t() + 1;
    if span < 2 * period {
        return Err(Error::invalid(format!(
            "series spans {span} steps, at least {} needed for period {period}",
            2 * period
        )));
    }
    let ctx = series.samples()[0].1.ctx();
    let bits = T::precision(ctx).mantissa_bits().unwrap_or(256).max(256) + 64;
    let mut max_dev = Float::new(bits);
    let mut max_anti = Float::new(bits);
    let mut max_mod = Float::new(bits);
    let mut max_abs = Float::new(bits);
    let mut compared = 0;
    let mut periodic_exactly = true;
    let mut antiperiodic_exactly = true;
    for (t, z) in series.samples() {
        let abs = abs_big(z, bits);
        if abs > max_abs {
            max_abs = abs.clone();
        }
        let Some(later) = series.value_at(t + period) else {
            continue;
        };
        compared += 1;
        let diff = later.clone() - z.clone();
        let sum = later.clone() + z.clone();
        periodic_exactly &= diff.is_zero();
        antiperiodic_exactly &= sum.is_zero();
        let d = abs_big(&diff, bits);
        let s = abs_big(&sum, bits);
        let m = (abs_big(later, bits) - &abs).abs();
        if d > max_dev {
            max_dev = d;
        }
        if s > max_anti {
            max_anti = s;
        }
        if m > max_mod {
            max_mod = m;
        }
    }
    let relative = if max_abs.is_zero() {
        0.0
    } else {
        to_f64(&Float::with_val(bits, &max_mod / &max_abs))
    };

    let first = series.first_t();
    let mut peaks = Vec::new();
    let mut start = first;
    while start + period - 1 <= series.last_t() {
        let best = (start..start + period)
            .filter_map(|t| series.value_at(t).map(|z| (t, z.ln_abs_f64())))
            .fold(None, |acc: Option<(u64, f64)>, (t, l)| match acc {
                Some((_, bl)) if bl >= l => acc,
                _ => Some((t, l)),
            });
        peaks.extend(best);
        start += period;
    }

    Ok(PeriodicityReport {
        period,
        compared,
        max_deviation: to_f64(&max_dev),
        max_antiperiodic_deviation: to_f64(&max_anti),
        max_modulus_deviation: to_f64(&max_mod),
        relative_modulus_deviation: relative,
        periodic_exactly,
        antiperiodic_exactly,
        peaks,
    })
}

/// Least-squares line through `(t, ln|f(t)|)` over a window.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitReport {
    pub t0: u64,
    pub t1: u64,
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square deviation of `ln|f|` from the line.
    pub residual: f64,
    pub points: usize,
    /// Exact zeros dropped from the window.
    pub excluded_zeros: usize,
}

/// Default window `[⌈0.1·M⌉, ⌊0.9·M⌋]` inside the first half-period.
pub fn default_fit_window(m: u64) -> (u64, u64) {
    ((m as f64 * 0.1).ceil() as u64, (m * 9) / 10)
}

/// Fits `ln|f(t)| ≈ slope·t + intercept` for sampled `t ∈ [t0, t1]`.
///
/// Exact zeros are an error unless `exclude_zeros` is set, in which case
/// they are dropped and counted.
pub fn growth_rate_fit<T: Field>(
    series: &TimeSeries<T>,
    t0: u64,
    t1: u64,
    exclude_zeros: bool,
) -> Result<FitReport> {
    if t0 >= t1 {
        return Err(Error::invalid(format!("fit window [{t0}, {t1}] is empty")));
    }
    if t0 < series.first_t() || t1 > series.last_t() {
        return Err(Error::invalid(format!(
            "fit window [{t0}, {t1}] outside the series range [{}, {}]",
            series.first_t(),
            series.last_t()
        )));
    }
    let mut points = Vec::new();
    let mut zeros = Vec::new();
    for (t, z) in series.samples() {
        if *t < t0 || *t > t1 {
            continue;
        }
        if z.is_zero() {
            zeros.push(*t);
        } else {
            points.push((*t as f64, z.ln_abs_f64()));
        }
    }
    if !zeros.is_empty() && !exclude_zeros {
        return Err(Error::invalid(format!(
            "f vanishes at t = {zeros:?} inside the fit window"
        )));
    }
    if points.len() < 2 {
        return Err(Error::invalid("fewer than two nonzero samples in the fit window"));
    }
    let n = points.len() as f64;
    let mean_t = points.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / n;
    let (mut stt, mut sty) = (0.0, 0.0);
    for (t, y) in &points {
        stt += (t - mean_t) * (t - mean_t);
        sty += (t - mean_t) * (y - mean_y);
    }
    let slope = sty / stt;
    let intercept = mean_y - slope * mean_t;
    let residual = (points
        .iter()
        .map(|(t, y)| (y - slope * t - intercept).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    Ok(FitReport {
        t0,
        t1,
        slope,
        intercept,
        residual,
        points: points.len(),
        excluded_zeros: zeros.len(),
    })
}
