use super::{EvalPath, SeriesEval};
use crate::error::IllConditioning;
use crate::{Error, Result};

/// Controls for [`try_alternating_series_sum`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesOptions {
    /// Stop once `|term| < tol * |partial sum|`.
    pub tol: f64,
    pub k_max: usize,
    /// Largest tolerated ratio of accumulated rounding/term error to the sum.
    pub max_rounding: f64,
}

impl Default for SeriesOptions {
    fn default() -> Self {
        SeriesOptions { tol: 1e-10, k_max: 1000, max_rounding: 1e-6 }
    }
}

/// Sums `Σ_k term(k)` for a series that eventually alternates with shrinking
/// magnitude.
///
/// The returned error estimate is the magnitude of the first omitted term.
/// Growth that persists to `k_max`, or cancellation that loses more than six
/// significant digits of the partial sum, is reported as
/// [`Error::NonMonotone`].
pub fn alternating_series_sum<F: FnMut(usize) -> f64>(mut term: F, tol: f64, k_max: usize) -> Result<SeriesEval> {
    let opts = SeriesOptions { tol, k_max, ..SeriesOptions::default() };
    try_alternating_series_sum(|k| Ok((term(k), 0.0)), opts)
}

/// Like [`alternating_series_sum`] for terms that are themselves computed
/// numerically: `term(k)` yields `(value, absolute error)` or fails.
pub fn try_alternating_series_sum<F>(mut term: F, opts: SeriesOptions) -> Result<SeriesEval>
where
    F: FnMut(usize) -> Result<(f64, f64)>,
{
    if !(opts.tol > 0.0) || opts.k_max == 0 {
        return Err(Error::domain("series needs tol > 0 and k_max >= 1"));
    }
    let mut sum = 0.0;
    let mut abs_sum = 0.0;
    let mut term_err = 0.0;
    let mut last_mag = f64::INFINITY;
    let mut omitted = None;

    for k in 0..opts.k_max {
        let (t, e) = term(k)?;
        if !t.is_finite() {
            return Err(Error::NonMonotone {
                kind: IllConditioning::Growing,
                best: SeriesEval { value: sum, err_estimate: f64::INFINITY, effort: k, path: EvalPath::Series },
            });
        }
        if k > 0 && (t == 0.0 || t.abs() < opts.tol * sum.abs()) {
            omitted = Some((k, t.abs()));
            break;
        }
        sum += t;
        abs_sum += t.abs();
        term_err += e;
        last_mag = t.abs();
    }

    let (effort, first_omitted, growing) = match omitted {
        Some((k, mag)) => (k, mag, false),
        None => {
            let (t, _) = term(opts.k_max)?;
            (opts.k_max, t.abs(), t.abs() >= last_mag)
        }
    };
    let best = SeriesEval { value: sum, err_estimate: first_omitted + term_err, effort, path: EvalPath::Series };
    if growing {
        return Err(Error::NonMonotone { kind: IllConditioning::Growing, best });
    }
    let rounding = f64::EPSILON * abs_sum + term_err;
    if rounding > opts.max_rounding * sum.abs() {
        return Err(Error::NonMonotone { kind: IllConditioning::Cancellation, best });
    }
    if omitted.is_none() {
        return Err(Error::NoConvergence { best });
    }
    Ok(best)
}
