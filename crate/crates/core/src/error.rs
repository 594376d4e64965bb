use std::fmt;

use crate::specfun::SeriesEval;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Why an alternating series was rejected.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IllConditioning {
    /// Term magnitudes were still growing when the term budget ran out.
    Growing,
    /// Partial sums cancel so strongly that rounding swamps the result.
    Cancellation,
}

impl fmt::Display for IllConditioning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IllConditioning::Growing => f.write_str("terms still growing"),
            IllConditioning::Cancellation => f.write_str("catastrophic cancellation"),
        }
    }
}

#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    #[error("invalid `{field}`: {reason}")]
    Validation { field: &'static str, reason: String },

    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("no convergence (best estimate {} ± {})", best.value, best.err_estimate)]
    NoConvergence { best: SeriesEval },

    #[error("ill-conditioned series ({kind}); best estimate {} after {} terms", best.value, best.effort)]
    NonMonotone { kind: IllConditioning, best: SeriesEval },

    #[error("unstable estimate: {0}")]
    Unstable(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// Applies `f` to the best estimate of a numerical failure so it stays
    /// in the units of the final quantity. Other errors pass through.
    pub fn map_best(self, f: impl FnOnce(SeriesEval) -> SeriesEval) -> Self {
        match self {
            Error::NoConvergence { best } => Error::NoConvergence { best: f(best) },
            Error::NonMonotone { kind, best } => Error::NonMonotone { kind, best: f(best) },
            other => other,
        }
    }

    /// The best available value carried by numerical failures, if any.
    pub fn best_estimate(&self) -> Option<&SeriesEval> {
        match self {
            Error::NoConvergence { best } | Error::NonMonotone { best, .. } => Some(best),
            _ => None,
        }
    }
}

/// Transforms a result and, on numerical failure, its best estimate alike.
pub(crate) trait MapEval {
    fn map_eval(self, f: impl Fn(SeriesEval) -> SeriesEval) -> Result<SeriesEval>;
}

impl MapEval for Result<SeriesEval> {
    fn map_eval(self, f: impl Fn(SeriesEval) -> SeriesEval) -> Result<SeriesEval> {
        match self {
            Ok(v) => Ok(f(v)),
            Err(e) => Err(e.map_best(f)),
        }
    }
}
