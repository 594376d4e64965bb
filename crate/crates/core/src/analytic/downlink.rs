//! Downlink SINR distribution and rate.

use crate::error::MapEval;
use std::f64::consts::{LN_2, PI};

use super::uplink::hypergeometric_series;
use super::{
    complement, empty_probability, integrate_fallible, radial_breaks, rate_from_success, require_il, EvalOptions,
};
use crate::model::Scenario;
use crate::specfun::{gauss_2f1_unit, rate_kernel_g, EvalPath, QuadOptions, SeriesEval};
use crate::{Error, Result};

fn require_offset(s: &Scenario) -> Result<()> {
    if s.d_pair <= 0.0 {
        return Err(Error::domain("downlink evaluators need d > 0 (the interferer sits on the DL user)"));
    }
    Ok(())
}

/// `P(SINR_DL > z) = 2πλ ∫₀^{R_c} r e^{−zσ²r^α/P_AP} e^{−λπr²} /
/// (1 + (r/d)^α (P_U/P_AP) z) dr`.
fn success(z: f64, s: &Scenario, opts: QuadOptions) -> Result<SeriesEval> {
    let lam = s.lambda_d;
    let noise_coef = z * s.noise / s.p_ap;
    let int_coef = z * (s.p_u / s.p_ap) * s.d_pair.powf(-s.alpha);
    let alpha = s.alpha;
    let f = |r: f64| {
        let ra = r.powf(alpha);
        Ok(2.0 * PI * lam * r * (-noise_coef * ra - lam * PI * r * r).exp() / (1.0 + int_coef * ra))
    };
    let mut pts = radial_breaks(s);
    // Where the noise and interference terms switch on.
    for coef in [noise_coef, int_coef] {
        if coef > 0.0 {
            let knee = coef.powf(-1.0 / alpha);
            if knee > 0.0 && knee < s.r_cell {
                pts.push(knee);
            }
        }
    }
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    integrate_fallible(f, &pts, opts)
}

fn trivial_cdf(z: f64, s: &Scenario) -> Option<SeriesEval> {
    if z <= 0.0 {
        Some(SeriesEval::exact(0.0, EvalPath::Integral))
    } else if z == f64::INFINITY || s.p_ap == 0.0 {
        Some(SeriesEval::exact(1.0, EvalPath::Integral))
    } else {
        None
    }
}

/// Downlink SINR cdf for any α and noise level.
pub fn cdf_dl_general(z: f64, s: &Scenario, opts: EvalOptions) -> Result<SeriesEval> {
    super::check_z(z)?;
    if let Some(v) = trivial_cdf(z, s) {
        return Ok(v);
    }
    require_offset(s)?;
    if s.is_interference_limited() && s.p_u == 0.0 {
        return Ok(SeriesEval::exact(empty_probability(s), EvalPath::Integral));
    }
    success(z, s, opts.outer()).map_eval(complement)
}

/// Interference-limited downlink cdf. The series path sums
/// `Σ_k (−1)^k (λπR²)^{k+1}/(k+1)! · ₂F₁(1, 2(k+1)/α; 2(k+1)/α + 1;
/// −z (P_U/P_AP)(R/d)^α)`; the integral path evaluates the general
/// integral with the noise term removed.
pub fn cdf_dl_il(z: f64, s: &Scenario, path: EvalPath, opts: EvalOptions) -> Result<SeriesEval> {
    require_il(s, "interference-limited downlink cdf")?;
    super::check_z(z)?;
    if let Some(v) = trivial_cdf(z, s) {
        return Ok(SeriesEval { path, ..v });
    }
    require_offset(s)?;
    if s.p_u == 0.0 {
        return Ok(SeriesEval::exact(empty_probability(s), path));
    }
    il_success(z, s, path, opts).map_eval(complement)
}

fn il_success(z: f64, s: &Scenario, path: EvalPath, opts: EvalOptions) -> Result<SeriesEval> {
    match path {
        EvalPath::Integral => success(z, s, opts.outer()),
        EvalPath::Series => {
            let x = z * (s.p_u / s.p_ap) * (s.r_cell / s.d_pair).powf(s.alpha);
            let alpha = s.alpha;
            hypergeometric_series(s.mean_users(), opts, |k| gauss_2f1_unit(2.0 * (k as f64 + 1.0) / alpha, x))
        }
    }
}

/// Downlink ergodic rate for any α and noise level: the `(t, r)` double
/// integral `∫₀^∞ [1 − F(2^t − 1)] dt`.
pub fn rate_dl_general(s: &Scenario, opts: EvalOptions) -> Result<SeriesEval> {
    if s.p_ap == 0.0 {
        return Ok(SeriesEval::exact(0.0, EvalPath::Integral));
    }
    require_offset(s)?;
    if s.is_interference_limited() && s.p_u == 0.0 {
        return Err(Error::domain("downlink rate is unbounded without noise and interference"));
    }
    let middle = opts.middle();
    rate_from_success(|y| Ok(success(y, s, middle)?.value), opts.outer())
}

/// Interference-limited downlink rate. The series path sums
/// `Σ_k (−1)^k (λπR²)^{k+1}/(k+1)! · G(2(k+1)/α, (P_U/P_AP)(R/d)^α) / ln 2`.
pub fn rate_dl_il(s: &Scenario, path: EvalPath, opts: EvalOptions) -> Result<SeriesEval> {
    require_il(s, "interference-limited downlink rate")?;
    if s.p_ap == 0.0 {
        return Ok(SeriesEval::exact(0.0, path));
    }
    require_offset(s)?;
    if s.p_u == 0.0 {
        return Err(Error::domain("downlink rate is unbounded without noise and interference"));
    }
    match path {
        EvalPath::Series => {
            let c = (s.p_u / s.p_ap) * (s.r_cell / s.d_pair).powf(s.alpha);
            let alpha = s.alpha;
            hypergeometric_series(s.mean_users(), opts, |k| rate_kernel_g(2.0 * (k as f64 + 1.0) / alpha, c))
                .map_eval(|v| v.affine(1.0 / LN_2, 0.0))
        }
        EvalPath::Integral => rate_dl_general(s, opts).map_eval(|v| SeriesEval { path, ..v }),
    }
}
