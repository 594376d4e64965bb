//! Semi-analytic half-duplex rates and the FD-over-HD gain.

use std::f64::consts::{LN_2, PI};

use super::{combine_links, integrate_fallible, radial_breaks, rate_fd, EvalOptions, FdRates};
use crate::error::MapEval;
use crate::geometry::ul_distance_to_ap;
use crate::model::{HdCondition, Scenario, Selection};
use crate::specfun::{exp_integral_ei_scaled, EvalPath, SeriesEval};
use crate::{Error, Result};

/// Half-duplex rates, time shares included.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HdRates {
    pub dl: SeriesEval,
    pub ul: SeriesEval,
}

impl HdRates {
    pub fn sum(&self) -> f64 {
        self.dl.value + self.ul.value
    }

    pub fn err_estimate(&self) -> f64 {
        self.dl.err_estimate + self.ul.err_estimate
    }
}

/// `E[ln(1 + a g)]` for `g ~ Exp(1)`: `e^{1/a} E₁(1/a)`.
fn log_gain_exp(a: f64) -> Result<f64> {
    if a == 0.0 {
        return Ok(0.0);
    }
    let s = 1.0 / a;
    if s > 1e3 {
        return Ok(a - a * a);
    }
    Ok(-exp_integral_ei_scaled(-s)?)
}

/// `E[ln(1 + a g)]` for `g ~ Gamma(2, 1)`: `1 + (1 − 1/a) e^{1/a} E₁(1/a)`.
fn log_gain_gamma2(a: f64) -> Result<f64> {
    if a == 0.0 {
        return Ok(0.0);
    }
    let s = 1.0 / a;
    if s > 1e3 {
        return Ok(2.0 * a - 3.0 * a * a);
    }
    Ok(1.0 + (1.0 - s) * -exp_integral_ei_scaled(-s)?)
}

/// Expected HD rates over the nearest-user distance, the pairing angle and
/// Rayleigh fading (two-branch norms for the antenna-conserved case).
pub fn rate_hd_semianalytic(s: &Scenario, condition: HdCondition, opts: EvalOptions) -> Result<HdRates> {
    if s.selection != Selection::Nus {
        return Err(Error::domain("analytic evaluators cover nearest-user selection only"));
    }
    let snr_d = s.p_ap_hd / s.hd_noise();
    let snr_u = s.p_u_hd / s.hd_noise();
    let (dl_scale, fading): (f64, fn(f64) -> Result<f64>) = match condition {
        HdCondition::Rc => (1.0, log_gain_exp),
        HdCondition::Ac => (0.5, log_gain_gamma2),
    };
    let (lam, alpha, d) = (s.lambda_d, s.alpha, s.d_pair);
    let pdf = |r: f64| 2.0 * PI * lam * r * (-lam * PI * r * r).exp();

    let dl = integrate_fallible(
        |r| {
            let w = pdf(r);
            if w == 0.0 {
                return Ok(0.0);
            }
            Ok(w * fading(dl_scale * snr_d * r.powf(-alpha))?)
        },
        &radial_breaks(s),
        opts.outer(),
    )
    .map_eval(|v| v.affine(s.delta / LN_2, 0.0));

    let inner = opts.inner();
    let ul = integrate_fallible(
        |r| {
            let w = pdf(r);
            if w == 0.0 {
                return Ok(0.0);
            }
            let at = |th: f64| {
                let dist = ul_distance_to_ap(r, d, th);
                if dist == 0.0 {
                    return Ok(0.0);
                }
                fading(snr_u * dist.powf(-alpha))
            };
            if d == 0.0 {
                return Ok(w * at(0.0)?);
            }
            integrate_fallible(at, &[0.0, PI], inner).map_eval(|v| v.affine(w / PI, 0.0)).map(|v| v.value)
        },
        &radial_breaks(s),
        opts.outer(),
    )
    .map_eval(|v| v.affine((1.0 - s.delta) / LN_2, 0.0));

    let (dl, ul) = combine_links(dl, ul)?;
    Ok(HdRates { dl, ul })
}

/// `(R_FD − R_HD) / R_FD`.
pub fn gain_from_rates(r_fd: f64, r_hd: f64) -> Result<f64> {
    if r_fd == 0.0 || !r_fd.is_finite() {
        return Err(Error::domain(format!("gain needs a finite nonzero FD rate, got {r_fd}")));
    }
    Ok((r_fd - r_hd) / r_fd)
}

/// Analytic FD-over-HD sum-rate gain, with the error estimate propagated
/// from both rates.
pub fn gain(s: &Scenario, condition: HdCondition, opts: EvalOptions) -> Result<SeriesEval> {
    let sum = |r: Result<(f64, f64)>| match r {
        Ok(v) => Ok((v, false)),
        Err(e) => match e.best_estimate() {
            Some(b) => Ok(((b.value, b.err_estimate), true)),
            None => Err(e),
        },
    };
    let ((r_fd, fd_err), fd_stalled) = sum(rate_fd(s, opts).map(|r: FdRates| (r.sum(), r.err_estimate())))?;
    let ((r_hd, hd_err), hd_stalled) =
        sum(rate_hd_semianalytic(s, condition, opts).map(|r| (r.sum(), r.err_estimate())))?;
    let value = gain_from_rates(r_fd, r_hd)?;
    let err = hd_err / r_fd.abs() + fd_err * r_hd.abs() / (r_fd * r_fd);
    let best = SeriesEval { value, err_estimate: err, effort: 0, path: EvalPath::Integral };
    if fd_stalled || hd_stalled {
        return Err(Error::NoConvergence { best });
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{HdPowerPolicy, ScenarioConfig};
    use crate::specfun::quad_adaptive;

    #[test]
    fn fading_expectations_match_quadrature() {
        for a in [1e-5, 0.3, 4.0, 1e4] {
            let e1 = quad_adaptive(|g| (a * g).ln_1p() * (-g).exp(), 0.0, f64::INFINITY, 1e-12).unwrap().value;
            let e2 = quad_adaptive(|g| (a * g).ln_1p() * g * (-g).exp(), 0.0, f64::INFINITY, 1e-12).unwrap().value;
            assert!((log_gain_exp(a).unwrap() / e1 - 1.0).abs() < 1e-6, "a={a}");
            assert!((log_gain_gamma2(a).unwrap() / e2 - 1.0).abs() < 1e-6, "a={a}");
        }
    }

    #[test]
    fn gain_definition() {
        assert_eq!(gain_from_rates(2.0, 2.0).unwrap(), 0.0);
        assert_eq!(gain_from_rates(2.0, 0.0).unwrap(), 1.0);
        assert!(gain_from_rates(0.0, 1.0).is_err());
    }

    #[test]
    fn tiny_downlink_share_under_power_policy() {
        let c = ScenarioConfig { delta: 0.01, hd_power_policy: HdPowerPolicy::Power, ..Default::default() };
        let r = rate_hd_semianalytic(&c.validate().unwrap(), HdCondition::Rc, EvalOptions::default()).unwrap();
        let full = ScenarioConfig { delta: 0.99, hd_power_policy: HdPowerPolicy::Power, ..Default::default() };
        let f = rate_hd_semianalytic(&full.validate().unwrap(), HdCondition::Rc, EvalOptions::default()).unwrap();
        assert!(r.dl.value < 0.011 * f.dl.value / 0.99 + 1e-12);
    }

    #[test]
    fn antenna_conserved_beats_rf_conserved() {
        let s = ScenarioConfig::default().validate().unwrap();
        let rc = rate_hd_semianalytic(&s, HdCondition::Rc, EvalOptions::default()).unwrap();
        let ac = rate_hd_semianalytic(&s, HdCondition::Ac, EvalOptions::default()).unwrap();
        assert!(rc.sum() < ac.sum());
    }
}
