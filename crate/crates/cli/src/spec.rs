//! Sweep descriptions: which field to vary, over which values, and what to
//! compute at each point.

use std::fmt;
use std::str::FromStr;

use fdcell_core::model::{DERIVED_FIELDS, NUMERIC_FIELDS};

use crate::InputError;

/// A quantity a sweep can report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Metric {
    OutageDl,
    OutageUl,
    RateFd,
    RateHdRc,
    RateHdAc,
    GainRc,
    GainAc,
    /// DL outage with the UL interferer switched off.
    OutageDlAsymptotic,
    /// UL outage with loopback interference removed.
    OutageUlAsymptotic,
    /// Sum of the interference-free UL and DL rates.
    RateAsymptotic,
}

impl Metric {
    pub const ALL: [Metric; 10] = [
        Metric::OutageDl,
        Metric::OutageUl,
        Metric::RateFd,
        Metric::RateHdRc,
        Metric::RateHdAc,
        Metric::GainRc,
        Metric::GainAc,
        Metric::OutageDlAsymptotic,
        Metric::OutageUlAsymptotic,
        Metric::RateAsymptotic,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Metric::OutageDl => "outage_dl",
            Metric::OutageUl => "outage_ul",
            Metric::RateFd => "rate_fd",
            Metric::RateHdRc => "rate_hd_rc",
            Metric::RateHdAc => "rate_hd_ac",
            Metric::GainRc => "gain_rc",
            Metric::GainAc => "gain_ac",
            Metric::OutageDlAsymptotic => "outage_dl_asymptotic",
            Metric::OutageUlAsymptotic => "outage_ul_asymptotic",
            Metric::RateAsymptotic => "rate_asymptotic",
        }
    }

    /// Axis label for plots.
    pub fn label(self) -> &'static str {
        match self {
            Metric::OutageDl | Metric::OutageDlAsymptotic => "DL outage probability",
            Metric::OutageUl | Metric::OutageUlAsymptotic => "UL outage probability",
            Metric::GainRc | Metric::GainAc => "sum-rate gain",
            _ => "rate (bit/s/Hz)",
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Metric {
    type Err = InputError;

    fn from_str(s: &str) -> Result<Self, InputError> {
        Metric::ALL
            .into_iter()
            .find(|m| m.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| InputError::new(format!("unknown output `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Engine {
    Mc,
    Analytic,
}

impl Engine {
    pub fn as_str(self) -> &'static str {
        match self {
            Engine::Mc => "MC",
            Engine::Analytic => "ANALYTIC",
        }
    }
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Engine {
    type Err = InputError;

    fn from_str(s: &str) -> Result<Self, InputError> {
        match s.to_ascii_uppercase().as_str() {
            "MC" => Ok(Engine::Mc),
            "ANALYTIC" => Ok(Engine::Analytic),
            _ => Err(InputError::new(format!("unknown engine `{s}` (expected MC or ANALYTIC)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub variable: String,
    pub values: Vec<f64>,
    pub outputs: Vec<Metric>,
    pub engines: Vec<Engine>,
}

impl SweepSpec {
    /// Parses the `key = value` sweep format with keys `variable`, `values`,
    /// `outputs` and `engines`. `engines` defaults to both.
    pub fn parse(text: &str) -> Result<Self, InputError> {
        let mut variable = None;
        let mut values = None;
        let mut outputs = None;
        let mut engines = None;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let at = |msg: String| InputError::new(format!("sweep spec line {}: {msg}", i + 1));
            let (key, value) =
                line.split_once('=').ok_or_else(|| at(format!("expected `key = value`, got `{line}`")))?;
            let value = value.trim();
            let slot_taken = match key.trim() {
                "variable" => variable.replace(value.to_owned()).is_some(),
                "values" => values.replace(parse_values(value).map_err(|e| at(e.0))?).is_some(),
                "outputs" => outputs.replace(parse_list(value).map_err(|e| at(e.0))?).is_some(),
                "engines" => engines.replace(parse_list(value).map_err(|e| at(e.0))?).is_some(),
                other => return Err(at(format!("unknown key `{other}`"))),
            };
            if slot_taken {
                return Err(at(format!("duplicate key `{}`", key.trim())));
            }
        }
        let spec = SweepSpec {
            variable: variable.ok_or_else(|| InputError::new("sweep spec lacks `variable`"))?,
            values: values.ok_or_else(|| InputError::new("sweep spec lacks `values`"))?,
            outputs: outputs.ok_or_else(|| InputError::new("sweep spec lacks `outputs`"))?,
            engines: engines.unwrap_or_else(|| vec![Engine::Mc, Engine::Analytic]),
        };
        spec.check()?;
        Ok(spec)
    }

    pub fn check(&self) -> Result<(), InputError> {
        if !NUMERIC_FIELDS.contains(&self.variable.as_str()) && !DERIVED_FIELDS.contains(&self.variable.as_str()) {
            return Err(InputError::new(format!("`{}` is not a sweepable numeric field", self.variable)));
        }
        if self.values.is_empty() {
            return Err(InputError::new("sweep needs at least one value"));
        }
        if let Some(v) = self.values.iter().find(|v| !v.is_finite()) {
            return Err(InputError::new(format!("sweep values must be finite, got {v}")));
        }
        if self.outputs.is_empty() || self.engines.is_empty() {
            return Err(InputError::new("sweep needs at least one output and one engine"));
        }
        Ok(())
    }
}

/// Comma-separated items.
pub fn parse_list<T: FromStr<Err = InputError>>(text: &str) -> Result<Vec<T>, InputError> {
    text.split(',').map(str::trim).filter(|t| !t.is_empty()).map(str::parse).collect()
}

/// Either a comma-separated list or an inclusive `start:stop:step` range.
pub fn parse_values(text: &str) -> Result<Vec<f64>, InputError> {
    let num = |t: &str| -> Result<f64, InputError> {
        t.trim().parse().map_err(|_| InputError::new(format!("`{}` is not a number", t.trim())))
    };
    let parts: Vec<&str> = text.split(':').collect();
    match parts.as_slice() {
        [start, stop, step] => {
            let (start, stop, step) = (num(start)?, num(stop)?, num(step)?);
            if !(step > 0.0) || !(stop >= start) || !start.is_finite() || !stop.is_finite() {
                return Err(InputError::new(format!("bad range `{text}`")));
            }
            let n = ((stop - start) / step + 1e-9).floor() as usize;
            Ok((0..=n).map(|i| start + i as f64 * step).collect())
        }
        [_] => text.split(',').map(str::trim).filter(|t| !t.is_empty()).map(num).collect(),
        _ => Err(InputError::new(format!("bad value list `{text}`"))),
    }
}
