//! Numerical kernels used by the analytic evaluators.

mod erf;
mod expint;
mod hyper;
pub mod quad;
mod series;

pub use erf::{erfc, erfcx, parabolic_d_m1};
pub use expint::{exp_integral_ei, exp_integral_ei_scaled};
pub use hyper::{appell_f1, gauss_2f1_unit, rate_kernel_g};
pub use quad::{integrate, integrate_breaks, quad_adaptive, QuadOptions};
pub use series::{alternating_series_sum, try_alternating_series_sum, SeriesOptions};

/// Which representation produced a value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EvalPath {
    Series,
    Integral,
}

impl EvalPath {
    pub fn as_str(self) -> &'static str {
        match self {
            EvalPath::Series => "series",
            EvalPath::Integral => "integral",
        }
    }
}

/// A numerically evaluated quantity with its error budget.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesEval {
    pub value: f64,
    /// Absolute error estimate, never negative.
    pub err_estimate: f64,
    /// Terms summed or integrand evaluations spent.
    pub effort: usize,
    pub path: EvalPath,
}

impl SeriesEval {
    pub fn exact(value: f64, path: EvalPath) -> Self {
        SeriesEval { value, err_estimate: 0.0, effort: 0, path }
    }

    /// Applies `value -> scale * value + shift`, scaling the error with it.
    pub fn affine(self, scale: f64, shift: f64) -> Self {
        SeriesEval { value: scale * self.value + shift, err_estimate: scale.abs() * self.err_estimate, ..self }
    }
}
