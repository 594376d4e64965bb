//! Scenario configuration and the per-realization SINR and rate formulas
//! shared by both engines.
//!
//! Powers are given in dB relative to the unit reference noise, so with the
//! default `noise = 1` they are transmit SNRs. `noise = 0` switches to the
//! interference-limited model.

use std::fmt::{self, Write as _};
use std::str::FromStr;

use rand::Rng;
use rand_distr::Exp1;

use crate::geometry::TopologySample;
use crate::{Error, Result};

/// Downlink user scheduling rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Selection {
    /// Nearest user to the AP.
    Nus,
    /// Uniformly random user in the cell.
    Rus,
}

/// How half-duplex transmit powers relate to the full-duplex ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum HdPowerPolicy {
    /// Equal energy: each HD slot transmits `P/δ` (DL) and `P/(1−δ)` (UL).
    Energy,
    /// Equal instantaneous power.
    Power,
}

/// Half-duplex antenna configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum HdCondition {
    /// RF-chain conserved: one antenna in each slot.
    Rc,
    /// Antenna conserved: both antennas used with MRT/MRC.
    Ac,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Link {
    Ul,
    Dl,
}

macro_rules! keyword_enum {
    ($ty:ident { $($var:ident => $name:literal),+ $(,)? }) => {
        impl $ty {
            pub fn as_str(self) -> &'static str {
                match self { $($ty::$var => $name),+ }
            }
        }

        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }

        impl FromStr for $ty {
            type Err = String;

            fn from_str(s: &str) -> std::result::Result<Self, String> {
                $(if s.eq_ignore_ascii_case($name) { return Ok($ty::$var); })+
                Err(format!("expected one of {}, got `{s}`", [$($name),+].join(", ")))
            }
        }
    };
}

keyword_enum!(Selection { Nus => "NUS", Rus => "RUS" });
keyword_enum!(HdPowerPolicy { Energy => "ENERGY", Power => "POWER" });
keyword_enum!(HdCondition { Rc => "RC", Ac => "AC" });
keyword_enum!(Link { Ul => "UL", Dl => "DL" });

/// Raw, unvalidated description of one cell scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    /// Downlink user density (users per m²).
    pub lambda_d: f64,
    /// Cell radius (m).
    pub r_cell: f64,
    /// Distance between paired UL and DL users (m).
    pub d_pair: f64,
    /// Path-loss exponent.
    pub alpha: f64,
    pub p_ap_db: f64,
    /// `-inf` switches the UL user off.
    pub p_ul_db: f64,
    /// Mean residual loopback-interference power (linear).
    pub sigma_li: f64,
    /// Noise power relative to the reference; 0 is interference-limited.
    pub noise: f64,
    /// HD downlink time fraction.
    pub delta: f64,
    pub selection: Selection,
    pub hd_power_policy: HdPowerPolicy,
    pub gamma_th_db: f64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            lambda_d: 1e-3,
            r_cell: 200.0,
            d_pair: 25.0,
            alpha: 2.0,
            p_ap_db: 25.0,
            p_ul_db: 25.0,
            sigma_li: 0.1,
            noise: 1.0,
            delta: 0.5,
            selection: Selection::Nus,
            hd_power_policy: HdPowerPolicy::Energy,
            gamma_th_db: 3.0,
        }
    }
}

/// Numeric fields that can be read, set and swept by name.
pub const NUMERIC_FIELDS: &[&str] =
    &["lambda_d", "r_cell", "d_pair", "alpha", "p_ap_db", "p_ul_db", "sigma_li", "noise", "delta", "gamma_th_db"];

/// Derived names accepted by [`ScenarioConfig::set`]: `sigma_li_db` sets the
/// LI variance in dB, `p_db` sets both transmit powers.
pub const DERIVED_FIELDS: &[&str] = &["sigma_li_db", "p_db"];

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

impl ScenarioConfig {
    pub fn get(&self, name: &str) -> Option<f64> {
        Some(match name {
            "lambda_d" => self.lambda_d,
            "r_cell" => self.r_cell,
            "d_pair" => self.d_pair,
            "alpha" => self.alpha,
            "p_ap_db" => self.p_ap_db,
            "p_ul_db" => self.p_ul_db,
            "sigma_li" => self.sigma_li,
            "noise" => self.noise,
            "delta" => self.delta,
            "gamma_th_db" => self.gamma_th_db,
            "sigma_li_db" => linear_to_db(self.sigma_li),
            _ => return None,
        })
    }

    /// Sets a numeric field (or a derived name) without validating it.
    pub fn set(&mut self, name: &str, value: f64) -> Result<()> {
        let slot = match name {
            "lambda_d" => &mut self.lambda_d,
            "r_cell" => &mut self.r_cell,
            "d_pair" => &mut self.d_pair,
            "alpha" => &mut self.alpha,
            "p_ap_db" => &mut self.p_ap_db,
            "p_ul_db" => &mut self.p_ul_db,
            "sigma_li" => &mut self.sigma_li,
            "noise" => &mut self.noise,
            "delta" => &mut self.delta,
            "gamma_th_db" => &mut self.gamma_th_db,
            "sigma_li_db" => {
                self.sigma_li = db_to_linear(value);
                return Ok(());
            }
            "p_db" => {
                self.p_ap_db = value;
                self.p_ul_db = value;
                return Ok(());
            }
            _ => {
                return Err(Error::Validation {
                    field: "variable",
                    reason: format!("`{name}` is not a sweepable numeric field"),
                })
            }
        };
        *slot = value;
        Ok(())
    }

    /// Checks every bound and caches linear-domain values.
    pub fn validate(&self) -> Result<Scenario> {
        fn check(ok: bool, field: &'static str, reason: &str) -> Result<()> {
            if ok {
                Ok(())
            } else {
                Err(Error::Validation { field, reason: reason.to_owned() })
            }
        }
        let power_ok = |db: f64| !db.is_nan() && db != f64::INFINITY;
        check(self.lambda_d > 0.0 && self.lambda_d.is_finite(), "lambda_d", "must be finite and > 0")?;
        check(self.r_cell > 0.0 && self.r_cell.is_finite(), "r_cell", "must be finite and > 0")?;
        check(self.d_pair >= 0.0 && self.d_pair.is_finite(), "d_pair", "must be finite and >= 0")?;
        check(self.alpha >= 2.0 && self.alpha.is_finite(), "alpha", "must be finite and >= 2")?;
        check(power_ok(self.p_ap_db), "p_ap_db", "must be finite or -inf")?;
        check(power_ok(self.p_ul_db), "p_ul_db", "must be finite or -inf")?;
        check(self.sigma_li >= 0.0 && self.sigma_li.is_finite(), "sigma_li", "must be finite and >= 0")?;
        check(self.noise >= 0.0 && self.noise.is_finite(), "noise", "must be finite and >= 0")?;
        check(self.delta > 0.0 && self.delta < 1.0, "delta", "must lie in the open interval (0, 1)")?;
        check(self.gamma_th_db.is_finite(), "gamma_th_db", "must be finite")?;

        let p_ap = db_to_linear(self.p_ap_db);
        let p_u = db_to_linear(self.p_ul_db);
        let (p_ap_hd, p_u_hd) = match self.hd_power_policy {
            HdPowerPolicy::Energy => (p_ap / self.delta, p_u / (1.0 - self.delta)),
            HdPowerPolicy::Power => (p_ap, p_u),
        };
        Ok(Scenario { cfg: self.clone(), p_ap, p_u, p_ap_hd, p_u_hd, gamma_th: db_to_linear(self.gamma_th_db) })
    }

    /// Parses the flat `key = value` scenario format. Keys not present keep
    /// their defaults; the result is not validated.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = ScenarioConfig::default();
        let mut seen: Vec<&str> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |reason: String| Error::Parse { line: line_no, reason };
            let (key, value) =
                line.split_once('=').ok_or_else(|| err(format!("expected `key = value`, got `{line}`")))?;
            let (key, value) = (key.trim(), value.trim());
            if seen.contains(&key) {
                return Err(err(format!("duplicate key `{key}`")));
            }
            match key {
                "selection" => cfg.selection = value.parse().map_err(err)?,
                "hd_power_policy" => cfg.hd_power_policy = value.parse().map_err(err)?,
                _ if NUMERIC_FIELDS.contains(&key) => {
                    let v: f64 = value.parse().map_err(|_| err(format!("`{key}`: `{value}` is not a number")))?;
                    cfg.set(key, v).map_err(|e| err(e.to_string()))?;
                }
                _ => return Err(err(format!("unknown key `{key}`"))),
            }
            seen.push(key);
        }
        Ok(cfg)
    }

    /// Renders the scenario in the format read by [`ScenarioConfig::parse`].
    pub fn to_file_string(&self) -> String {
        let mut out = String::new();
        for name in NUMERIC_FIELDS {
            let _ = writeln!(out, "{name} = {}", self.get(name).unwrap_or(f64::NAN));
        }
        let _ = writeln!(out, "selection = {}", self.selection);
        let _ = writeln!(out, "hd_power_policy = {}", self.hd_power_policy);
        out
    }
}

/// A validated scenario with its linear-domain values cached.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    cfg: ScenarioConfig,
    pub p_ap: f64,
    pub p_u: f64,
    /// Half-duplex powers after applying the power policy.
    pub p_ap_hd: f64,
    pub p_u_hd: f64,
    pub gamma_th: f64,
}

impl std::ops::Deref for Scenario {
    type Target = ScenarioConfig;

    fn deref(&self) -> &ScenarioConfig {
        &self.cfg
    }
}

impl Scenario {
    pub fn config(&self) -> &ScenarioConfig {
        &self.cfg
    }

    pub fn is_interference_limited(&self) -> bool {
        self.cfg.noise == 0.0
    }

    /// Noise used by half-duplex links, which carry no interference: the
    /// unit reference when the FD model is interference-limited.
    pub fn hd_noise(&self) -> f64 {
        if self.cfg.noise > 0.0 {
            self.cfg.noise
        } else {
            1.0
        }
    }

    /// Expected number of DL users in the cell, `λπR²`.
    pub fn mean_users(&self) -> f64 {
        self.cfg.lambda_d * std::f64::consts::PI * self.cfg.r_cell * self.cfg.r_cell
    }
}

/// `distance^(−alpha)`.
pub fn path_loss(distance: f64, alpha: f64) -> Result<f64> {
    if !(distance > 0.0) {
        return Err(Error::domain(format!("path loss is singular at distance {distance}")));
    }
    Ok(distance.powf(-alpha))
}

/// Channel power gains for one realization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FadingDraw {
    pub g_ad: f64,
    pub g_ud: f64,
    pub g_ua: f64,
    /// Residual LI power, exponential with mean `sigma_li`.
    pub g_li: f64,
    /// Two-branch norms `‖h‖²` for HD-AC; the first branch is `g_ad` / `g_ua`.
    pub g_ad_vec2: f64,
    pub g_ua_vec2: f64,
}

impl FadingDraw {
    /// Draws, in order, `g_ad, g_ud, g_ua, g_li` and the second AC branches.
    pub fn sample<R: Rng + ?Sized>(rng: &mut R, sigma_li: f64) -> Self {
        let mut e = || -> f64 { rng.sample(Exp1) };
        let g_ad = e();
        let g_ud = e();
        let g_ua = e();
        let g_li = sigma_li * e();
        let g_ad_vec2 = g_ad + e();
        let g_ua_vec2 = g_ua + e();
        FadingDraw { g_ad, g_ud, g_ua, g_li, g_ad_vec2, g_ua_vec2 }
    }
}

/// `signal / (interference + noise)` with a zero signal mapping to 0 and a
/// zero denominator mapping to `+∞`.
fn ratio(signal: f64, denom: f64) -> f64 {
    if signal == 0.0 {
        0.0
    } else if denom == 0.0 {
        f64::INFINITY
    } else {
        signal / denom
    }
}

/// Downlink SINR `P_AP g_ad r^−α / (P_U g_ud d^−α + σ²)`.
pub fn dl_sinr(s: &Scenario, t: &TopologySample, f: &FadingDraw) -> Result<f64> {
    if t.empty {
        return Err(Error::domain("DL SINR of an empty topology"));
    }
    let signal = s.p_ap * f.g_ad * path_loss(t.r_sel, s.alpha)?;
    let interference = s.p_u * f.g_ud * path_loss(t.dist_ul_dl, s.alpha)?;
    Ok(ratio(signal, interference + s.noise))
}

/// Uplink SINR `P_U g_ua D^−α / (P_AP g_li + σ²)`.
pub fn ul_sinr(s: &Scenario, t: &TopologySample, f: &FadingDraw) -> Result<f64> {
    if t.empty {
        return Err(Error::domain("UL SINR of an empty topology"));
    }
    let signal = s.p_u * f.g_ua * path_loss(t.dist_ul_ap, s.alpha)?;
    Ok(ratio(signal, s.p_ap * f.g_li + s.noise))
}

/// Half-duplex `(dl_rate, ul_rate)` in bit/s/Hz, time shares included.
pub fn hd_instant_rates(
    s: &Scenario,
    t: &TopologySample,
    f: &FadingDraw,
    condition: HdCondition,
) -> Result<(f64, f64)> {
    if t.empty {
        return Err(Error::domain("HD rates of an empty topology"));
    }
    let snr_d = s.p_ap_hd / s.hd_noise();
    let snr_u = s.p_u_hd / s.hd_noise();
    let l_d = path_loss(t.r_sel, s.alpha)?;
    let l_u = path_loss(t.dist_ul_ap, s.alpha)?;
    let (dl, ul) = match condition {
        HdCondition::Rc => (snr_d * l_d * f.g_ad, snr_u * l_u * f.g_ua),
        HdCondition::Ac => (0.5 * snr_d * l_d * f.g_ad_vec2, snr_u * l_u * f.g_ua_vec2),
    };
    Ok((s.delta * dl.ln_1p() / std::f64::consts::LN_2, (1.0 - s.delta) * ul.ln_1p() / std::f64::consts::LN_2))
}
