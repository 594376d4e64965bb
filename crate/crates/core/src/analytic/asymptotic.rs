//! High-SNR references obtained by dropping the interference terms.

use std::f64::consts::{LN_2, PI};

use super::{rate_from_success, EvalOptions};
use crate::model::Scenario;
use crate::specfun::{erfcx, exp_integral_ei_scaled, EvalPath, SeriesEval};
use crate::{Error, Result};

/// `ψ_U = (P_U/σ²) λπ` and `ψ_D = (P_AP/σ²)(λπ)²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticParams {
    pub psi_u: f64,
    pub psi_d: f64,
}

impl AsymptoticParams {
    pub fn new(s: &Scenario) -> Result<Self> {
        if s.is_interference_limited() {
            return Err(Error::domain("asymptotic forms need noise > 0"));
        }
        let lp = s.lambda_d * PI;
        Ok(AsymptoticParams { psi_u: s.p_u / s.noise * lp, psi_d: s.p_ap / s.noise * lp * lp })
    }
}

/// Uplink SNR cdf for α = 2:
/// `1 − (1 + z/ψ_U)^{−1} exp(−λπd² / (1 + ψ_U/z))`.
pub fn asymptotic_cdf_ul(z: f64, s: &Scenario) -> Result<f64> {
    if s.alpha != 2.0 {
        return Err(Error::domain("uplink asymptotic cdf is stated for alpha = 2"));
    }
    let p = AsymptoticParams::new(s)?;
    if z.is_nan() {
        return Err(Error::domain("cdf argument is NaN"));
    }
    if z <= 0.0 {
        return Ok(0.0);
    }
    if p.psi_u == 0.0 || z == f64::INFINITY {
        return Ok(1.0);
    }
    let a = s.lambda_d * PI * s.d_pair * s.d_pair;
    Ok(1.0 - (-a / (1.0 + p.psi_u / z)).exp() / (1.0 + z / p.psi_u))
}

/// Uplink asymptotic rate for α = 2.
///
/// With `A = λπd²`, `β = 1 − ψ_U` and `S(x) = e^{−x} Ei(x)` the rate is
/// `ψ_U/β · [S(A/β) − e^{−A} S(ψ_U A/β)] / ln 2`. The removable points
/// `ψ_U = 1` and `d = 0` are integrated numerically from the cdf.
pub fn asymptotic_rate_ul(s: &Scenario, opts: EvalOptions) -> Result<SeriesEval> {
    let p = AsymptoticParams::new(s)?;
    if s.alpha != 2.0 {
        return Err(Error::domain("uplink asymptotic rate is stated for alpha = 2"));
    }
    if p.psi_u == 0.0 {
        return Ok(SeriesEval::exact(0.0, EvalPath::Series));
    }
    let a = s.lambda_d * PI * s.d_pair * s.d_pair;
    let beta = 1.0 - p.psi_u;
    if a == 0.0 || beta.abs() < 1e-3 {
        return rate_from_success(|y| Ok(1.0 - asymptotic_cdf_ul(y, s)?), opts.outer());
    }
    let first = exp_integral_ei_scaled(a / beta)?;
    let second = exp_integral_ei_scaled(p.psi_u * a / beta)?;
    let value = p.psi_u / beta * (first - (-a).exp() * second) / LN_2;
    Ok(SeriesEval::exact(value, EvalPath::Series))
}

/// Downlink SNR cdf: for α = 2, `1 − (1 + zλπ/ψ_D)^{−1}`; for α = 4,
/// `1 − x e^{x²/4} D₋₁(x)` with `x = sqrt(ψ_D/(2z))`.
pub fn asymptotic_cdf_dl(z: f64, s: &Scenario) -> Result<f64> {
    let p = AsymptoticParams::new(s)?;
    if s.alpha != 2.0 && s.alpha != 4.0 {
        return Err(Error::domain("downlink asymptotic cdf is stated for alpha = 2 and 4"));
    }
    if z.is_nan() {
        return Err(Error::domain("cdf argument is NaN"));
    }
    if z <= 0.0 {
        return Ok(0.0);
    }
    if p.psi_d == 0.0 || z == f64::INFINITY {
        return Ok(1.0);
    }
    if s.alpha == 2.0 {
        return Ok(1.0 - 1.0 / (1.0 + z * s.lambda_d * PI / p.psi_d));
    }
    // e^{x²/4} D₋₁(x) = sqrt(π/2) erfcx(x/√2), which stays finite for large x.
    let x = (p.psi_d / (2.0 * z)).sqrt();
    Ok(1.0 - x * (PI / 2.0).sqrt() * erfcx(x / std::f64::consts::SQRT_2))
}

/// Downlink asymptotic rate: `q ln q / ((q − 1) ln 2)` with
/// `q = ψ_D/(λπ)` for α = 2, numerical integration of the cdf for α = 4.
pub fn asymptotic_rate_dl(s: &Scenario, opts: EvalOptions) -> Result<SeriesEval> {
    let p = AsymptoticParams::new(s)?;
    if s.alpha != 2.0 && s.alpha != 4.0 {
        return Err(Error::domain("downlink asymptotic rate is stated for alpha = 2 and 4"));
    }
    if p.psi_d == 0.0 {
        return Ok(SeriesEval::exact(0.0, EvalPath::Series));
    }
    let q = p.psi_d / (s.lambda_d * PI);
    if s.alpha == 2.0 && (q - 1.0).abs() >= 1e-6 {
        return Ok(SeriesEval::exact(q * q.ln() / ((q - 1.0) * LN_2), EvalPath::Series));
    }
    rate_from_success(|y| Ok(1.0 - asymptotic_cdf_dl(y, s)?), opts.outer())
}
