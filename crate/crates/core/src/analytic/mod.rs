//! Outage-probability and ergodic-rate evaluators.
//!
//! Every cdf evaluator returns the probability that the link SINR falls
//! below `z`. Integrals over the selected-user distance run over `[0, R_c]`
//! with the nearest-user density left unnormalized, so a cell without users
//! counts as an outage with zero rate, the same convention the Monte Carlo
//! engine uses. Rates are in bit/s/Hz.

mod asymptotic;
mod downlink;
mod halfduplex;
mod uplink;

use std::f64::consts::{LN_2, PI};

pub use asymptotic::{asymptotic_cdf_dl, asymptotic_cdf_ul, asymptotic_rate_dl, asymptotic_rate_ul, AsymptoticParams};
pub use downlink::{cdf_dl_general, cdf_dl_il, rate_dl_general, rate_dl_il};
pub use halfduplex::{gain, gain_from_rates, rate_hd_semianalytic, HdRates};
pub use uplink::{
    cdf_ul_alpha2_il, cdf_ul_alpha4_il_lb, cdf_ul_general, rate_ul_alpha2_il, rate_ul_alpha4_il_ub, rate_ul_general,
    Alpha2SeriesParams,
};

use crate::model::{Link, Scenario};
use crate::specfun::{integrate_breaks, EvalPath, QuadOptions, SeriesEval, SeriesOptions};
use crate::{Error, Result};

/// Accuracy controls shared by the evaluators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalOptions {
    /// Relative tolerance of the outermost quadrature.
    pub tol: f64,
    pub series: SeriesOptions,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions { tol: QuadOptions::DEFAULT_TOL, series: SeriesOptions::default() }
    }
}

impl EvalOptions {
    pub fn with_tol(tol: f64) -> Self {
        EvalOptions { tol, ..Default::default() }
    }

    pub(crate) fn outer(&self) -> QuadOptions {
        QuadOptions::relative(self.tol, self.tol * 1e-2)
    }

    /// Nested integrals are solved well below the outer tolerance so their
    /// error does not leak into the outer error estimate.
    pub(crate) fn inner(&self) -> QuadOptions {
        let t = (self.tol * 1e-2).max(1e-13);
        QuadOptions::relative(t, t * 1e-2)
    }

    /// Tolerances for integrands that are themselves nested integrals.
    pub(crate) fn middle(&self) -> QuadOptions {
        let t = (self.tol * 1e-1).max(1e-12);
        QuadOptions::relative(t, t * 1e-2)
    }
}

/// Which evaluator produced an outage value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    UlGeneral,
    UlAlpha2Il,
    UlAlpha4IlBound,
    DlGeneral,
    DlIl,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::UlGeneral => "ul_general",
            Method::UlAlpha2Il => "ul_alpha2_il",
            Method::UlAlpha4IlBound => "ul_alpha4_il_bound",
            Method::DlGeneral => "dl_general",
            Method::DlIl => "dl_il",
        }
    }
}

/// A cdf value tagged with the evaluator that produced it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutageEval {
    pub value: SeriesEval,
    pub method: Method,
}

/// Mean number of users for which the alternating series are still
/// numerically usable in double precision.
pub const SERIES_STABLE_MEAN_USERS: f64 = 20.0;

/// Outage probability of `link` at threshold `gamma_th`, using the most
/// specific exact evaluator available for the scenario.
///
/// Interference-limited scenarios go to the closed forms (series when the
/// mean user count is small enough, otherwise their integral forms); the
/// general integrals cover everything else.
pub fn outage(link: Link, s: &Scenario, gamma_th: f64, opts: EvalOptions) -> Result<OutageEval> {
    if !(gamma_th > 0.0) {
        return Err(Error::domain(format!("outage threshold must be positive, got {gamma_th}")));
    }
    if s.selection != crate::model::Selection::Nus {
        return Err(Error::domain("analytic evaluators cover nearest-user selection only"));
    }
    let prefer = if s.mean_users() <= SERIES_STABLE_MEAN_USERS { EvalPath::Series } else { EvalPath::Integral };
    let with_fallback = |f: &dyn Fn(EvalPath) -> Result<SeriesEval>| match f(prefer) {
        Err(Error::NonMonotone { .. } | Error::NoConvergence { .. }) if prefer == EvalPath::Series => {
            f(EvalPath::Integral)
        }
        other => other,
    };
    let il = s.is_interference_limited();
    let (value, method) = match link {
        Link::Ul if il && s.alpha == 2.0 => {
            (with_fallback(&|p| cdf_ul_alpha2_il(gamma_th, s, p, opts))?, Method::UlAlpha2Il)
        }
        Link::Ul if il && s.alpha == 4.0 && s.d_pair == 0.0 => {
            (with_fallback(&|p| cdf_ul_alpha4_il_lb(gamma_th, s, p, opts))?, Method::UlAlpha4IlBound)
        }
        Link::Ul => (cdf_ul_general(gamma_th, s, opts)?, Method::UlGeneral),
        Link::Dl if il => (with_fallback(&|p| cdf_dl_il(gamma_th, s, p, opts))?, Method::DlIl),
        Link::Dl => (cdf_dl_general(gamma_th, s, opts)?, Method::DlGeneral),
    };
    Ok(OutageEval { value, method })
}

/// Full-duplex rate with its per-link breakdown.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FdRates {
    pub ul: SeriesEval,
    pub dl: SeriesEval,
    pub ul_method: Method,
    pub dl_method: Method,
}

impl FdRates {
    pub fn sum(&self) -> f64 {
        self.ul.value + self.dl.value
    }

    pub fn err_estimate(&self) -> f64 {
        self.ul.err_estimate + self.dl.err_estimate
    }
}

/// Full-duplex sum rate `R_UL + R_DL`.
///
/// Interference-limited scenarios use the interference-limited rate forms
/// where they exist.
///
/// When either link fails to converge the error's best estimate is the sum.
pub fn rate_fd(s: &Scenario, opts: EvalOptions) -> Result<FdRates> {
    let il = s.is_interference_limited();
    let (ul, ul_method) = if il && s.alpha == 2.0 {
        (rate_ul_alpha2_il(s, EvalPath::Integral, opts), Method::UlAlpha2Il)
    } else {
        (rate_ul_general(s, opts), Method::UlGeneral)
    };
    let (dl, dl_method) = if il {
        (rate_dl_il(s, EvalPath::Integral, opts), Method::DlIl)
    } else {
        (rate_dl_general(s, opts), Method::DlGeneral)
    };
    let (ul, dl) = combine_links(ul, dl)?;
    Ok(FdRates { ul, dl, ul_method, dl_method })
}

/// Pairs two per-link results. A numerical failure on either side becomes
/// a failure whose best estimate is the sum of both best values.
pub(crate) fn combine_links(a: Result<SeriesEval>, b: Result<SeriesEval>) -> Result<(SeriesEval, SeriesEval)> {
    let best = |r: &Result<SeriesEval>| match r {
        Ok(v) => Some(*v),
        Err(e) => e.best_estimate().copied(),
    };
    match (&a, &b) {
        (Ok(x), Ok(y)) => Ok((*x, *y)),
        _ => {
            for r in [&a, &b] {
                if let Err(e) = r {
                    if e.best_estimate().is_none() {
                        return Err(e.clone());
                    }
                }
            }
            let (x, y) = (
                best(&a).unwrap_or(SeriesEval::exact(0.0, EvalPath::Integral)),
                best(&b).unwrap_or(SeriesEval::exact(0.0, EvalPath::Integral)),
            );
            let sum = SeriesEval {
                value: x.value + y.value,
                err_estimate: x.err_estimate + y.err_estimate,
                effort: x.effort + y.effort,
                path: EvalPath::Integral,
            };
            Err(Error::NoConvergence { best: sum })
        }
    }
}

/// `∫₀^∞ success(2^t − 1) dt`, the ergodic rate in bits of a link whose
/// success probability `P(SINR > y)` is `success(y)`.
pub fn rate_from_success<F>(success: F, opts: QuadOptions) -> Result<SeriesEval>
where
    F: Fn(f64) -> Result<f64>,
{
    integrate_fallible(
        |t| {
            let y = (t * LN_2).exp_m1();
            // Far in the mapped tail `y` overflows; every link fails there.
            if y.is_infinite() {
                return Ok(0.0);
            }
            success(y)
        },
        &[0.0, 1.0, 4.0, f64::INFINITY],
        opts,
    )
}

/// Breakpoints for integrals over the selected distance on `[0, r_cell]`:
/// the pairing distance and a few multiples of the nearest-user length
/// scale `1/sqrt(λπ)`.
pub(crate) fn radial_breaks(s: &Scenario) -> Vec<f64> {
    let scale = 1.0 / (s.lambda_d * PI).sqrt();
    let mut pts = vec![0.0, s.r_cell];
    for p in [s.d_pair, scale, 3.0 * scale, 6.0 * scale] {
        if p > 0.0 && p < s.r_cell {
            pts.push(p);
        }
    }
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}

/// Same as [`radial_breaks`] in the squared-distance variable `υ = r²`.
pub(crate) fn area_breaks(s: &Scenario, extra: &[f64]) -> Vec<f64> {
    let r2 = s.r_cell * s.r_cell;
    let mut pts: Vec<f64> = radial_breaks(s).into_iter().map(|r| r * r).collect();
    pts.extend(extra.iter().copied().filter(|&p| p > 0.0 && p < r2));
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}

/// Runs an integrand that can fail. Integrand values that did not converge
/// are used at their best estimate and the whole integral is then reported
/// as not converged, with a best estimate of the integral itself; any other
/// failure is returned as is.
pub(crate) fn integrate_fallible<F>(f: F, points: &[f64], opts: QuadOptions) -> Result<SeriesEval>
where
    F: Fn(f64) -> Result<f64>,
{
    let failure = std::cell::RefCell::new(None);
    let stalled = std::cell::Cell::new(false);
    let g = |x: f64| match f(x) {
        Ok(v) => v,
        Err(e) => match e.best_estimate() {
            Some(best) => {
                stalled.set(true);
                best.value
            }
            None => {
                failure.borrow_mut().get_or_insert(e);
                0.0
            }
        },
    };
    let out = integrate_breaks(g, points, opts);
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    match out {
        Ok(best) if stalled.get() => Err(Error::NoConvergence { best }),
        other => other,
    }
}

/// `1 − success`, clamped into `[0, 1]`.
pub(crate) fn complement(success: SeriesEval) -> SeriesEval {
    let mut out = success.affine(-1.0, 1.0);
    out.value = out.value.clamp(0.0, 1.0);
    out
}

pub(crate) fn check_z(z: f64) -> Result<()> {
    if z.is_nan() {
        return Err(Error::domain("cdf argument is NaN"));
    }
    Ok(())
}

pub(crate) fn require_il(s: &Scenario, what: &str) -> Result<()> {
    if !s.is_interference_limited() {
        return Err(Error::domain(format!("{what} requires noise = 0 (interference-limited)")));
    }
    Ok(())
}

pub(crate) fn require_alpha(s: &Scenario, alpha: f64, what: &str) -> Result<()> {
    if s.alpha != alpha {
        return Err(Error::domain(format!("{what} requires alpha = {alpha}, got {}", s.alpha)));
    }
    Ok(())
}

/// Probability of an empty cell, `e^{−λπR_c²}`.
pub(crate) fn empty_probability(s: &Scenario) -> f64 {
    (-s.mean_users()).exp()
}
