//! Runs every analytic evaluator that applies to a scenario against Monte
//! Carlo, on a 20-point threshold grid for cdfs and at the rate level.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context;
use fdcell_core::analytic::{self, EvalOptions};
use fdcell_core::montecarlo::{EstimateWithCI, RateMode};
use fdcell_core::{Error, EvalPath, HdCondition, Link, Scenario, Selection, SeriesEval};

use crate::eval::Settings;
use crate::ComparisonFailure;

/// Relative tolerance of rate comparisons.
pub const RATE_REL_TOL: f64 = 0.02;
/// Standard errors allowed between a cdf estimate and its analytic value.
pub const SE_FACTOR: f64 = 3.0;

/// The thresholds of the cdf comparisons: 20 points from −15 dB to 30 dB.
pub fn z_grid() -> Vec<f64> {
    (0..20).map(|i| 10f64.powf((-15.0 + 45.0 * i as f64 / 19.0) / 10.0)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    NotApplicable,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::NotApplicable => "N/A",
        }
    }
}

/// How the analytic value must relate to the simulation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Equal,
    /// The analytic value is a lower bound.
    AtMost,
    /// The analytic value is an upper bound.
    AtLeast,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub check: String,
    pub z: Option<f64>,
    pub analytic: Option<f64>,
    pub monte_carlo: Option<f64>,
    pub std_err: Option<f64>,
    pub tolerance: Option<f64>,
    pub relation: Relation,
    pub status: Status,
    pub note: String,
}

impl Comparison {
    fn not_applicable(check: &str, note: impl Into<String>) -> Self {
        Comparison {
            check: check.to_owned(),
            z: None,
            analytic: None,
            monte_carlo: None,
            std_err: None,
            tolerance: None,
            relation: Relation::Equal,
            status: Status::NotApplicable,
            note: note.into(),
        }
    }

    fn judge(check: &str, z: Option<f64>, an: f64, mc: &EstimateWithCI, tol: f64, relation: Relation) -> Self {
        let diff = an - mc.mean;
        let ok = match relation {
            Relation::Equal => diff.abs() <= tol,
            Relation::AtMost => diff <= tol,
            Relation::AtLeast => diff >= -tol,
        };
        Comparison {
            check: check.to_owned(),
            z,
            analytic: Some(an),
            monte_carlo: Some(mc.mean),
            std_err: Some(mc.std_err),
            tolerance: Some(tol),
            relation,
            status: if ok && an.is_finite() { Status::Pass } else { Status::Fail },
            note: String::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub comparisons: Vec<Comparison>,
}

impl ValidationReport {
    pub fn failed(&self) -> usize {
        self.comparisons.iter().filter(|c| c.status == Status::Fail).count()
    }

    pub fn passed(&self) -> bool {
        self.failed() == 0
    }

    /// One line per check name with its worst point.
    pub fn summary(&self) -> String {
        let mut names: Vec<&str> = Vec::new();
        for c in &self.comparisons {
            if !names.contains(&c.check.as_str()) {
                names.push(&c.check);
            }
        }
        let mut out = String::new();
        for name in names {
            let group: Vec<&Comparison> = self.comparisons.iter().filter(|c| c.check == name).collect();
            let fails = group.iter().filter(|c| c.status == Status::Fail).count();
            let status = if group.iter().all(|c| c.status == Status::NotApplicable) {
                Status::NotApplicable
            } else if fails > 0 {
                Status::Fail
            } else {
                Status::Pass
            };
            let detail = if status == Status::NotApplicable {
                group[0].note.clone()
            } else {
                format!("{} point(s), {fails} failed", group.len())
            };
            let _ = writeln!(out, "{:<4} {name}: {detail}", status.as_str());
        }
        let _ = writeln!(out, "{} of {} comparisons failed", self.failed(), self.comparisons.len());
        out
    }

    /// Writes `validation_report.csv` into `dir` and returns its path.
    pub fn write(&self, dir: &Path) -> anyhow::Result<PathBuf> {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        let path = dir.join("validation_report.csv");
        let mut w = csv::Writer::from_path(&path).with_context(|| format!("writing {}", path.display()))?;
        w.write_record([
            "check",
            "z",
            "relation",
            "analytic",
            "monte_carlo",
            "std_err",
            "tolerance",
            "status",
            "note",
        ])?;
        let num = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        for c in &self.comparisons {
            let relation = match c.relation {
                Relation::Equal => "equal",
                Relation::AtMost => "lower_bound",
                Relation::AtLeast => "upper_bound",
            };
            w.write_record([
                c.check.clone(),
                num(c.z),
                relation.to_owned(),
                num(c.analytic),
                num(c.monte_carlo),
                num(c.std_err),
                num(c.tolerance),
                c.status.as_str().to_owned(),
                c.note.clone(),
            ])?;
        }
        w.flush()?;
        Ok(path)
    }

    pub fn into_result(self) -> anyhow::Result<()> {
        match self.failed() {
            0 => Ok(()),
            n => Err(ComparisonFailure { failed: n, total: self.comparisons.len() }.into()),
        }
    }
}

/// Post-processing applied to every analytic value before comparison.
/// Production runs use [`no_tamper`]; tests inject faults through it.
pub type Tamper = dyn Fn(&str, f64) -> f64;

pub fn no_tamper(_check: &str, v: f64) -> f64 {
    v
}

/// Tolerance of a cdf point: `3·max(se, sqrt(p(1−p)/n), 1/n)` plus the
/// analytic error estimate.
pub fn cdf_tolerance(analytic: &SeriesEval, mc: &EstimateWithCI) -> f64 {
    let n = mc.trials as f64;
    let p = analytic.value.clamp(0.0, 1.0);
    SE_FACTOR * mc.std_err.max((p * (1.0 - p) / n).sqrt()).max(1.0 / n) + analytic.err_estimate
}

/// Tolerance of a rate: 2% relative or 3 SE, whichever is wider, plus the
/// analytic error estimate.
pub fn rate_tolerance(analytic: &SeriesEval, mc: &EstimateWithCI) -> f64 {
    (RATE_REL_TOL * analytic.value.abs()).max(SE_FACTOR * mc.std_err) + analytic.err_estimate
}

struct Validator<'a> {
    s: &'a Scenario,
    st: &'a Settings,
    opts: EvalOptions,
    tamper: &'a Tamper,
    out: Vec<Comparison>,
}

fn preferred_path(s: &Scenario) -> EvalPath {
    if s.mean_users() <= analytic::SERIES_STABLE_MEAN_USERS {
        EvalPath::Series
    } else {
        EvalPath::Integral
    }
}

impl Validator<'_> {
    /// Records a numerical failure of the analytic side; returns None for
    /// inapplicable evaluators, which are listed as N/A.
    fn unwrap_analytic(&mut self, check: &str, r: Result<SeriesEval, Error>) -> anyhow::Result<Option<SeriesEval>> {
        match r {
            Ok(v) => Ok(Some(SeriesEval { value: (self.tamper)(check, v.value), ..v })),
            Err(Error::Domain(msg)) => {
                self.out.push(Comparison::not_applicable(check, msg));
                Ok(None)
            }
            Err(e @ (Error::NoConvergence { .. } | Error::NonMonotone { .. })) => {
                let mut c = Comparison::not_applicable(check, e.to_string());
                c.status = Status::Fail;
                self.out.push(c);
                Ok(None)
            }
            Err(e) => Err(e.into()),
        }
    }

    fn cdf(
        &mut self,
        check: &str,
        link: Link,
        sim: &Scenario,
        relation: Relation,
        f: impl Fn(f64) -> Result<SeriesEval, Error>,
    ) -> anyhow::Result<()> {
        let grid = z_grid();
        let mut analytic = Vec::with_capacity(grid.len());
        for &z in &grid {
            match self.unwrap_analytic(check, f(z))? {
                Some(v) => analytic.push(v),
                None => return Ok(()),
            }
        }
        let curve = self.st.mc().estimate_cdf_curve(sim, &grid, link, self.st.trials, self.st.seed)?;
        for (an, (z, mc)) in analytic.iter().zip(&curve) {
            self.out.push(Comparison::judge(check, Some(*z), an.value, mc, cdf_tolerance(an, mc), relation));
        }
        Ok(())
    }

    fn rate(
        &mut self,
        check: &str,
        r: Result<SeriesEval, Error>,
        mc: &EstimateWithCI,
        relation: Relation,
    ) -> anyhow::Result<()> {
        if let Some(an) = self.unwrap_analytic(check, r)? {
            self.out.push(Comparison::judge(check, None, an.value, mc, rate_tolerance(&an, mc), relation));
        }
        Ok(())
    }

    fn run(&mut self) -> anyhow::Result<()> {
        let (s, opts) = (self.s, self.opts);
        if s.selection != Selection::Nus {
            self.out.push(Comparison::not_applicable("all", "analytic evaluators cover nearest-user selection only"));
            return Ok(());
        }
        let il = s.is_interference_limited();
        let path = preferred_path(s);
        let has_dl = s.d_pair > 0.0;

        if has_dl {
            self.cdf("cdf_dl_general", Link::Dl, s, Relation::Equal, |z| analytic::cdf_dl_general(z, s, opts))?;
        } else {
            self.out.push(Comparison::not_applicable("cdf_dl_general", "no downlink user when d = 0"));
        }
        self.cdf("cdf_ul_general", Link::Ul, s, Relation::Equal, |z| analytic::cdf_ul_general(z, s, opts))?;
        if il {
            if has_dl {
                self.cdf("cdf_dl_il", Link::Dl, s, Relation::Equal, |z| analytic::cdf_dl_il(z, s, path, opts))?;
            }
            if s.alpha == 2.0 {
                self.cdf("cdf_ul_alpha2_il", Link::Ul, s, Relation::Equal, |z| {
                    analytic::cdf_ul_alpha2_il(z, s, path, opts)
                })?;
            }
            if s.alpha == 4.0 {
                let rel = if s.d_pair == 0.0 { Relation::Equal } else { Relation::AtMost };
                self.cdf("cdf_ul_alpha4_il_lb", Link::Ul, s, rel, |z| analytic::cdf_ul_alpha4_il_lb(z, s, path, opts))?;
            }
        }

        let (n, seed) = (self.st.trials, self.st.seed);
        let mc = self.st.mc();
        if has_dl {
            let fd_mc = mc.estimate_rates(s, RateMode::Fd, n, seed)?;
            match analytic::rate_fd(s, opts) {
                Ok(fd) => {
                    self.rate("rate_dl", Ok(fd.dl), &fd_mc.dl, Relation::Equal)?;
                    self.rate("rate_ul", Ok(fd.ul), &fd_mc.ul, Relation::Equal)?;
                    let sum = SeriesEval { value: fd.sum(), err_estimate: fd.err_estimate(), ..fd.dl };
                    self.rate("rate_fd", Ok(sum), &fd_mc.sum, Relation::Equal)?;
                }
                Err(e) => self.rate("rate_fd", Err(e), &fd_mc.sum, Relation::Equal)?,
            }
            if il {
                self.rate("rate_dl_il", analytic::rate_dl_il(s, path, opts), &fd_mc.dl, Relation::Equal)?;
                if s.alpha == 2.0 {
                    self.rate(
                        "rate_ul_alpha2_il",
                        analytic::rate_ul_alpha2_il(s, path, opts),
                        &fd_mc.ul,
                        Relation::Equal,
                    )?;
                }
            }
        }
        if il && s.alpha == 4.0 {
            let ul_mc = mc.estimate_link_rate(s, Link::Ul, n, seed)?;
            let rel = if s.d_pair == 0.0 { Relation::Equal } else { Relation::AtLeast };
            self.rate("rate_ul_alpha4_il_ub", analytic::rate_ul_alpha4_il_ub(s, path, opts), &ul_mc, rel)?;
        }
        for (cond, mode, check) in
            [(HdCondition::Rc, RateMode::HdRc, "rate_hd_rc"), (HdCondition::Ac, RateMode::HdAc, "rate_hd_ac")]
        {
            if !has_dl {
                self.out.push(Comparison::not_applicable(check, "no downlink user when d = 0"));
                continue;
            }
            let hd_mc = mc.estimate_rates(s, mode, n, seed)?;
            let an = analytic::rate_hd_semianalytic(s, cond, opts).map(|r| SeriesEval {
                value: r.sum(),
                err_estimate: r.err_estimate(),
                ..r.dl
            });
            self.rate(check, an, &hd_mc.sum, Relation::Equal)?;
        }

        self.asymptotics()
    }

    /// The asymptotic forms drop the UL interferer (downlink) or the
    /// loopback interference (uplink); simulation removes the same terms.
    fn asymptotics(&mut self) -> anyhow::Result<()> {
        let s = self.s;
        let names = ["asymptotic_cdf_ul", "asymptotic_cdf_dl", "asymptotic_rate_ul", "asymptotic_rate_dl"];
        if s.is_interference_limited() {
            for name in names {
                self.out.push(Comparison::not_applicable(name, "asymptotic forms need noise > 0"));
            }
            return Ok(());
        }
        let mut ul_cfg = s.config().clone();
        ul_cfg.sigma_li = 0.0;
        let ul_s = ul_cfg.validate()?;
        let mut dl_cfg = s.config().clone();
        dl_cfg.p_ul_db = f64::NEG_INFINITY;
        let dl_s = dl_cfg.validate()?;
        let opts = self.opts;
        let exact = |r: Result<f64, Error>| r.map(|v| SeriesEval::exact(v, EvalPath::Series));

        self.cdf("asymptotic_cdf_ul", Link::Ul, &ul_s, Relation::Equal, |z| exact(analytic::asymptotic_cdf_ul(z, s)))?;
        let (n, seed) = (self.st.trials, self.st.seed);
        let mc = self.st.mc();
        let ul_mc = mc.estimate_link_rate(&ul_s, Link::Ul, n, seed)?;
        self.rate("asymptotic_rate_ul", analytic::asymptotic_rate_ul(s, opts), &ul_mc, Relation::Equal)?;
        if s.d_pair > 0.0 {
            self.cdf("asymptotic_cdf_dl", Link::Dl, &dl_s, Relation::Equal, |z| {
                exact(analytic::asymptotic_cdf_dl(z, s))
            })?;
            let dl_mc = mc.estimate_link_rate(&dl_s, Link::Dl, n, seed)?;
            self.rate("asymptotic_rate_dl", analytic::asymptotic_rate_dl(s, opts), &dl_mc, Relation::Equal)?;
        }
        Ok(())
    }
}

/// Compares every applicable evaluator with simulation. Numerical failures
/// of an evaluator count as failed comparisons; invalid input is an error.
pub fn validate(s: &Scenario, settings: &Settings, tamper: &Tamper) -> anyhow::Result<ValidationReport> {
    let mut v = Validator { s, st: settings, opts: settings.opts(), tamper, out: Vec::new() };
    v.run()?;
    Ok(ValidationReport { comparisons: v.out })
}
