//! Uplink SINR distribution and rate.

use crate::error::MapEval;
use std::f64::consts::{LN_2, PI};

use super::{
    area_breaks, complement, empty_probability, integrate_fallible, radial_breaks, rate_from_success, require_alpha,
    require_il, EvalOptions,
};
use crate::error::IllConditioning;
use crate::geometry::ul_distance_to_ap;
use crate::model::Scenario;
use crate::specfun::{
    appell_f1, gauss_2f1_unit, integrate_breaks, rate_kernel_g, try_alternating_series_sum, EvalPath, QuadOptions,
    SeriesEval,
};
use crate::{Error, Result};

/// `P(SINR_UL > z)` for general α and noise, as a double integral over the
/// selected distance `r` and pairing angle `θ`.
fn success_general(z: f64, s: &Scenario, r_opts: QuadOptions, th_opts: QuadOptions) -> Result<SeriesEval> {
    let noise_coef = z * s.noise / s.p_u;
    let li_coef = z * (s.p_ap / s.p_u) * s.sigma_li;
    let (alpha, d, lam) = (s.alpha, s.d_pair, s.lambda_d);
    // Conditional success given D^{α/2}.
    let cond = move |dist: f64| {
        let da = dist.powf(alpha);
        (-noise_coef * da).exp() / (1.0 + li_coef * da)
    };
    let angular = |r: f64| -> Result<f64> {
        if d == 0.0 || r == 0.0 {
            return Ok(cond(r.max(d)));
        }
        // The integrand is peaked at θ = 0 when r ≈ d; split where the
        // angular term of D matches the radial one.
        let ratio = (r - d).abs() / (2.0 * (r * d).sqrt());
        let knee = 2.0 * ratio.min(1.0).asin();
        let pts: &[f64] = if knee > 0.0 && knee < PI { &[0.0, knee, PI] } else { &[0.0, PI] };
        integrate_breaks(|th| cond(ul_distance_to_ap(r, d, th)), pts, th_opts)
            .map_eval(|v| v.affine(1.0 / PI, 0.0))
            .map(|v| v.value)
    };
    let radial = |r: f64| -> Result<f64> {
        let w = 2.0 * PI * lam * r * (-lam * PI * r * r).exp();
        if w == 0.0 {
            return Ok(0.0);
        }
        angular(r).map(|a| w * a).map_err(|e| e.map_best(|b| b.affine(w, 0.0)))
    };
    integrate_fallible(radial, &radial_breaks(s), r_opts)
}

/// Uplink SINR cdf for any α and noise level.
pub fn cdf_ul_general(z: f64, s: &Scenario, opts: EvalOptions) -> Result<SeriesEval> {
    super::check_z(z)?;
    if let Some(v) = trivial_cdf(z, s) {
        return Ok(v);
    }
    if s.is_interference_limited() && s.sigma_li == 0.0 {
        return Ok(SeriesEval::exact(empty_probability(s), EvalPath::Integral));
    }
    success_general(z, s, opts.outer(), opts.inner()).map_eval(complement)
}

/// Edge cases shared by every uplink cdf: `F(z ≤ 0) = 0`, `F(∞) = 1` and a
/// silent UL user is always in outage.
fn trivial_cdf(z: f64, s: &Scenario) -> Option<SeriesEval> {
    if z <= 0.0 {
        Some(SeriesEval::exact(0.0, EvalPath::Integral))
    } else if z == f64::INFINITY || s.p_u == 0.0 {
        Some(SeriesEval::exact(1.0, EvalPath::Integral))
    } else {
        None
    }
}

/// Uplink ergodic rate for any α and noise level, `∫₀^∞ [1 − F(2^t − 1)] dt`.
pub fn rate_ul_general(s: &Scenario, opts: EvalOptions) -> Result<SeriesEval> {
    if s.p_u == 0.0 {
        return Ok(SeriesEval::exact(0.0, EvalPath::Integral));
    }
    if s.is_interference_limited() && s.sigma_li == 0.0 {
        return Err(Error::domain("uplink rate is unbounded without noise and loopback interference"));
    }
    let inner = opts.inner();
    let middle = opts.middle();
    rate_from_success(|y| Ok(success_general(y, s, middle, inner)?.value), opts.outer())
}

/// Parameters of the α = 2 interference-limited uplink closed form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Alpha2SeriesParams {
    /// `P_U / (P_AP z σ_AA)`.
    pub kappa: f64,
    /// `κ − d²`.
    pub b_param: f64,
    /// `(κ + d²)²`.
    pub c_param: f64,
    /// `(sqrt(R⁴ + 2bR² + c) − sqrt(c)) / R²`.
    pub varrho: f64,
    /// `ϱ − b/√c`, computed without cancellation.
    w: f64,
    d2: f64,
}

impl Alpha2SeriesParams {
    pub fn new(z: f64, s: &Scenario) -> Result<Self> {
        if !(z > 0.0) || !(s.sigma_li > 0.0) || !(s.p_u > 0.0) {
            return Err(Error::domain("α=2 series parameters need z, σ_AA and P_U positive"));
        }
        let kappa = s.p_u / (s.p_ap * z * s.sigma_li);
        let d2 = s.d_pair * s.d_pair;
        let r2 = s.r_cell * s.r_cell;
        let b = kappa - d2;
        let sc = kappa + d2;
        let c = sc * sc;
        // 4κd² = c − b², kept apart to avoid cancellation.
        let gap = 4.0 * kappa * d2;
        let big_s = (r2 + b).hypot(2.0 * (kappa.sqrt() * s.d_pair));
        let varrho = (r2 + 2.0 * b) / (big_s + sc);
        let cross = b * (r2 + b);
        let lead = if cross > 0.0 { gap * ((r2 + b).powi(2) + c) / (sc * big_s + cross) } else { sc * big_s - cross };
        let w = r2 * (lead + gap) / (sc * (big_s + sc).powi(2));
        Ok(Alpha2SeriesParams { kappa, b_param: b, c_param: c, varrho, w, d2 })
    }

    /// Appell arguments `(ϱ − t₀)/(1 − t₀)` and `−(ϱ − t₀)/(1 + t₀)` with
    /// `t₀ = b/√c`.
    pub fn appell_args(&self) -> (f64, f64) {
        let sc = self.c_param.sqrt();
        (self.w * sc / (2.0 * self.d2), -self.w * sc / (2.0 * self.kappa))
    }

    /// `ln I_k − ln F₁`, where `I_k = ∫₀^{R²} υ^k / sqrt(υ² + 2bυ + c) dυ`.
    fn log_scale(&self, k: usize) -> f64 {
        let kf = k as f64;
        let gap = 4.0 * self.kappa * self.d2;
        (kf + 1.0) * LN_2 + 0.5 * kf * self.c_param.ln() + (kf + 1.0) * (self.w * self.c_param / gap).ln()
            - (kf + 1.0).ln()
    }
}

/// α = 2 interference-limited uplink cdf.
///
/// The integral path evaluates
/// `1 − πλκ ∫₀^{R²} e^{−λπυ} / sqrt(υ² + 2bυ + c) dυ`; the series path
/// expands `e^{−λπυ}` and integrates each power with an Appell function.
pub fn cdf_ul_alpha2_il(z: f64, s: &Scenario, path: EvalPath, opts: EvalOptions) -> Result<SeriesEval> {
    require_alpha(s, 2.0, "α=2 uplink closed form")?;
    require_il(s, "α=2 uplink closed form")?;
    super::check_z(z)?;
    if let Some(v) = trivial_cdf(z, s) {
        return Ok(SeriesEval { path, ..v });
    }
    if s.sigma_li == 0.0 {
        return Ok(SeriesEval::exact(empty_probability(s), path));
    }
    alpha2_success(z, s, path, opts).map_eval(complement)
}

fn alpha2_success(z: f64, s: &Scenario, path: EvalPath, opts: EvalOptions) -> Result<SeriesEval> {
    let p = Alpha2SeriesParams::new(z, s)?;
    let lp = s.lambda_d * PI;
    match path {
        EvalPath::Integral => {
            // υ + b = ε sinh(u) with ε = 2√κ d turns 1/sqrt((υ + b)² + ε²)
            // into du, removing the near-singular peak at υ = −b.
            let eps = 2.0 * p.kappa.sqrt() * s.d_pair;
            let b = p.b_param;
            if eps == 0.0 {
                let f = |u: f64| (-lp * u).exp() / (u + b);
                return integrate_breaks(f, &area_breaks(s, &[]), opts.outer())
                    .map_eval(|v| v.affine(lp * p.kappa, 0.0));
            }
            let to_u = |v: f64| ((v + b) / eps).asinh();
            let mut pts: Vec<f64> = area_breaks(s, &[]).into_iter().map(to_u).collect();
            pts.push(0.0);
            let (lo, hi) = (to_u(0.0), to_u(s.r_cell * s.r_cell));
            pts.retain(|&u| u >= lo && u <= hi);
            pts.sort_by(f64::total_cmp);
            pts.dedup();
            let f = |u: f64| (-lp * (eps * u.sinh() - b).max(0.0)).exp();
            integrate_breaks(f, &pts, opts.outer()).map_eval(|v| v.affine(lp * p.kappa, 0.0))
        }
        EvalPath::Series => {
            if s.d_pair == 0.0 {
                return Err(Error::domain("α=2 uplink series needs d > 0"));
            }
            let (x, y) = p.appell_args();
            if !(x < 1.0) || !(y < 1.0) {
                return Err(Error::domain(format!("Appell arguments ({x}, {y}) left the Euler-integral domain")));
            }
            let lead = (lp * p.kappa).ln();
            let term = |k: usize| -> Result<(f64, f64)> {
                let kf = k as f64;
                let f1 = best_effort(appell_f1(kf + 1.0, kf + 1.0, kf + 1.0, kf + 2.0, x, y))?;
                let mag = (lead + kf * lp.ln() - libm::lgamma(kf + 1.0) + p.log_scale(k)).exp();
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                Ok((sign * mag * f1.value, mag * f1.err_estimate))
            };
            exp_weight_series(term, opts)
        }
    }
}

/// α = 2 interference-limited uplink rate: the rate integral of
/// [`cdf_ul_alpha2_il`] along the chosen path.
pub fn rate_ul_alpha2_il(s: &Scenario, path: EvalPath, opts: EvalOptions) -> Result<SeriesEval> {
    require_alpha(s, 2.0, "α=2 uplink rate")?;
    require_il(s, "α=2 uplink rate")?;
    if s.p_u == 0.0 {
        return Ok(SeriesEval::exact(0.0, path));
    }
    if s.sigma_li == 0.0 {
        return Err(Error::domain("uplink rate is unbounded without noise and loopback interference"));
    }
    let inner = EvalOptions { tol: (opts.tol * 1e-1).max(1e-12), ..opts };
    let no_users = 1.0 - empty_probability(s);
    let v = rate_from_success(
        |y| {
            if y <= 0.0 {
                return Ok(no_users);
            }
            Ok(alpha2_success(y, s, path, inner)?.value)
        },
        opts.outer(),
    );
    v.map_eval(|v| SeriesEval { path, ..v })
}

/// α = 4 interference-limited uplink cdf lower bound (exact when d = 0):
/// `1 − πλκ ∫₀^{R²} e^{−λπυ} / (κ + υ²) dυ` or its ₂F₁ series.
pub fn cdf_ul_alpha4_il_lb(z: f64, s: &Scenario, path: EvalPath, opts: EvalOptions) -> Result<SeriesEval> {
    require_alpha(s, 4.0, "α=4 uplink bound")?;
    require_il(s, "α=4 uplink bound")?;
    super::check_z(z)?;
    if let Some(v) = trivial_cdf(z, s) {
        return Ok(SeriesEval { path, ..v });
    }
    if s.sigma_li == 0.0 {
        return Ok(SeriesEval::exact(empty_probability(s), path));
    }
    alpha4_success(z, s, path, opts).map_eval(complement)
}

fn alpha4_success(z: f64, s: &Scenario, path: EvalPath, opts: EvalOptions) -> Result<SeriesEval> {
    let kappa = s.p_u / (s.p_ap * z * s.sigma_li);
    let lp = s.lambda_d * PI;
    match path {
        EvalPath::Integral => {
            // υ = √κ tan φ turns κ/(κ + υ²) dυ into √κ dφ.
            let rk = kappa.sqrt();
            let to_phi = |v: f64| (v / rk).atan();
            let pts: Vec<f64> = area_breaks(s, &[rk]).into_iter().map(to_phi).collect();
            let f = |phi: f64| (-lp * rk * phi.tan()).exp();
            integrate_breaks(f, &dedup_sorted(pts), opts.outer()).map_eval(|v| v.affine(lp * rk, 0.0))
        }
        EvalPath::Series => {
            let x = s.r_cell.powi(4) / kappa;
            let m = s.mean_users();
            hypergeometric_series(m, opts, |k| gauss_2f1_unit((k as f64 + 1.0) / 2.0, x))
        }
    }
}

/// A series term whose quadrature stalled is still usable: its error
/// estimate enters the series' rounding budget, which rejects the sum if the
/// stalled terms matter.
fn best_effort(r: Result<SeriesEval>) -> Result<SeriesEval> {
    match r {
        Err(Error::NoConvergence { best }) => Ok(best),
        other => other,
    }
}

fn dedup_sorted(mut pts: Vec<f64>) -> Vec<f64> {
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}

/// `Σ_k (−1)^k m^{k+1} / (k+1)! · kernel(k)`, the expansion shared by the
/// ₂F₁ and rate-kernel series.
pub(super) fn hypergeometric_series<K>(m: f64, opts: EvalOptions, kernel: K) -> Result<SeriesEval>
where
    K: Fn(usize) -> Result<SeriesEval>,
{
    let lm = m.ln();
    exp_weight_series(
        |k| {
            let kf = k as f64;
            let g = best_effort(kernel(k))?;
            let mag = ((kf + 1.0) * lm - libm::lgamma(kf + 2.0)).exp();
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            Ok((sign * mag * g.value, mag * g.err_estimate))
        },
        opts,
    )
}

/// Sums a series obtained by expanding the weight `e^{−λπυ}` under a
/// positive integrand. Since `0 < e^{−λπυ} ≤ 1`, the exact sum lies in
/// `[0, first term]`; a result outside that range can only come from
/// cancellation and is rejected.
fn exp_weight_series<F>(mut term: F, opts: EvalOptions) -> Result<SeriesEval>
where
    F: FnMut(usize) -> Result<(f64, f64)>,
{
    let mut first = None;
    let v = try_alternating_series_sum(
        |k| {
            let t = term(k)?;
            first.get_or_insert(t.0);
            Ok(t)
        },
        opts.series,
    )?;
    let first = first.unwrap_or(0.0);
    let slack = opts.series.max_rounding * first.abs() + v.err_estimate;
    if v.value < -slack || v.value > first + slack {
        return Err(Error::NonMonotone { kind: IllConditioning::Cancellation, best: v });
    }
    Ok(v)
}

/// α = 4 interference-limited uplink rate upper bound (exact when d = 0).
///
/// The series path sums `Σ_k (−1)^k (λπR²)^{k+1}/(k+1)! · G((k+1)/2,
/// σ_AA (P_AP/P_U) R⁴) / ln 2` with `G` from [`rate_kernel_g`]; the
/// integral path integrates the bound's success probability.
pub fn rate_ul_alpha4_il_ub(s: &Scenario, path: EvalPath, opts: EvalOptions) -> Result<SeriesEval> {
    require_alpha(s, 4.0, "α=4 uplink rate bound")?;
    require_il(s, "α=4 uplink rate bound")?;
    if s.p_u == 0.0 {
        return Ok(SeriesEval::exact(0.0, path));
    }
    if s.sigma_li == 0.0 {
        return Err(Error::domain("uplink rate is unbounded without noise and loopback interference"));
    }
    match path {
        EvalPath::Series => {
            let c = s.sigma_li * (s.p_ap / s.p_u) * s.r_cell.powi(4);
            hypergeometric_series(s.mean_users(), opts, |k| rate_kernel_g((k as f64 + 1.0) / 2.0, c))
                .map_eval(|v| v.affine(1.0 / LN_2, 0.0))
        }
        EvalPath::Integral => {
            let inner = EvalOptions { tol: (opts.tol * 1e-1).max(1e-12), ..opts };
            let no_users = 1.0 - empty_probability(s);
            let v = rate_from_success(
                |y| {
                    if y <= 0.0 {
                        return Ok(no_users);
                    }
                    Ok(alpha4_success(y, s, EvalPath::Integral, inner)?.value)
                },
                opts.outer(),
            );
            v.map_eval(|v| SeriesEval { path, ..v })
        }
    }
}
