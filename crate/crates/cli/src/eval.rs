//! Evaluates one metric of one scenario with one engine and turns the result
//! into a CSV row.

use fdcell_core::analytic::{self, EvalOptions};
use fdcell_core::montecarlo::{EstimateWithCI, MonteCarlo, RateMode};
use fdcell_core::{Error, HdCondition, Link, Scenario, ScenarioConfig, SeriesEval};

use crate::spec::{Engine, Metric};

/// Global numerical settings shared by every command.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Settings {
    pub trials: u64,
    pub seed: u64,
    pub tol: f64,
    pub threads: Option<usize>,
}

impl Default for Settings {
    fn default() -> Self {
        Settings { trials: 100_000, seed: 1, tol: 1e-8, threads: None }
    }
}

impl Settings {
    pub fn mc(&self) -> MonteCarlo {
        MonteCarlo { threads: self.threads }
    }

    pub fn opts(&self) -> EvalOptions {
        EvalOptions::with_tol(self.tol)
    }
}

/// One line of a result CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub variable: String,
    pub value: f64,
    pub metric: Metric,
    pub engine: Engine,
    pub mean: Option<f64>,
    pub std_err: Option<f64>,
    pub trials: Option<u64>,
    /// Which formula or simulation produced the row, or why there is no value:
    /// `n/a`, `unstable`, or a `no_convergence:` prefix on a best estimate.
    pub eval_path: String,
    pub err_estimate: Option<f64>,
}

impl Row {
    pub const HEADER: [&'static str; 9] =
        ["variable", "value", "metric", "engine", "mean", "std_err", "trials", "eval_path", "err_estimate"];

    pub fn is_convergence_failure(&self) -> bool {
        self.eval_path.starts_with("no_convergence")
    }

    pub fn fields(&self) -> [String; 9] {
        let num = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        [
            self.variable.clone(),
            self.value.to_string(),
            self.metric.to_string(),
            self.engine.to_string(),
            num(self.mean),
            num(self.std_err),
            self.trials.map(|t| t.to_string()).unwrap_or_default(),
            self.eval_path.clone(),
            num(self.err_estimate),
        ]
    }
}

/// A successful evaluation before it is attached to a sweep point.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub mean: f64,
    pub std_err: Option<f64>,
    pub trials: Option<u64>,
    pub eval_path: String,
    pub err_estimate: Option<f64>,
}

impl Evaluation {
    fn simulated(e: EstimateWithCI, tag: &str) -> Self {
        Evaluation {
            mean: e.mean,
            std_err: Some(e.std_err),
            trials: Some(e.trials),
            eval_path: tag.to_owned(),
            err_estimate: None,
        }
    }

    fn analytic(v: SeriesEval, method: &str) -> Self {
        Evaluation {
            mean: v.value,
            std_err: None,
            trials: None,
            eval_path: format!("{method}/{}", v.path.as_str()),
            err_estimate: Some(v.err_estimate),
        }
    }
}

const MC_TAG: &str = "monte_carlo";

fn variant(s: &Scenario, edit: impl FnOnce(&mut ScenarioConfig)) -> Result<Scenario, Error> {
    let mut c = s.config().clone();
    edit(&mut c);
    c.validate()
}

fn without_loopback(s: &Scenario) -> Result<Scenario, Error> {
    variant(s, |c| c.sigma_li = 0.0)
}

fn without_ul_interferer(s: &Scenario) -> Result<Scenario, Error> {
    variant(s, |c| c.p_ul_db = f64::NEG_INFINITY)
}

/// Computes `metric` for `s` with `engine`.
pub fn evaluate(s: &Scenario, metric: Metric, engine: Engine, settings: &Settings) -> Result<Evaluation, Error> {
    match engine {
        Engine::Mc => simulate(s, metric, settings),
        Engine::Analytic => analyze(s, metric, settings.opts()),
    }
}

fn simulate(s: &Scenario, metric: Metric, st: &Settings) -> Result<Evaluation, Error> {
    let mc = st.mc();
    let (n, seed) = (st.trials, st.seed);
    let rates = |mode| mc.estimate_rates(s, mode, n, seed).map(|r| Evaluation::simulated(r.sum, MC_TAG));
    match metric {
        Metric::OutageDl => Ok(Evaluation::simulated(mc.estimate_outage(s, s.gamma_th, Link::Dl, n, seed)?, MC_TAG)),
        Metric::OutageUl => Ok(Evaluation::simulated(mc.estimate_outage(s, s.gamma_th, Link::Ul, n, seed)?, MC_TAG)),
        Metric::RateFd => rates(RateMode::Fd),
        Metric::RateHdRc => rates(RateMode::HdRc),
        Metric::RateHdAc => rates(RateMode::HdAc),
        Metric::GainRc => Ok(Evaluation::simulated(mc.estimate_gain(s, HdCondition::Rc, n, seed)?, MC_TAG)),
        Metric::GainAc => Ok(Evaluation::simulated(mc.estimate_gain(s, HdCondition::Ac, n, seed)?, MC_TAG)),
        Metric::OutageDlAsymptotic => {
            let q = without_ul_interferer(s)?;
            let e = mc.estimate_outage(&q, s.gamma_th, Link::Dl, n, seed)?;
            Ok(Evaluation::simulated(e, "monte_carlo(p_ul=0)"))
        }
        Metric::OutageUlAsymptotic => {
            let q = without_loopback(s)?;
            let e = mc.estimate_outage(&q, s.gamma_th, Link::Ul, n, seed)?;
            Ok(Evaluation::simulated(e, "monte_carlo(sigma_li=0)"))
        }
        Metric::RateAsymptotic => {
            let ul = mc.estimate_link_rate(&without_loopback(s)?, Link::Ul, n, seed)?;
            let dl = mc.estimate_link_rate(&without_ul_interferer(s)?, Link::Dl, n, seed)?;
            Ok(Evaluation {
                mean: ul.mean + dl.mean,
                std_err: Some(ul.std_err.hypot(dl.std_err)),
                trials: Some(n),
                eval_path: "monte_carlo(sigma_li=0)+monte_carlo(p_ul=0)".to_owned(),
                err_estimate: None,
            })
        }
    }
}

fn analyze(s: &Scenario, metric: Metric, opts: EvalOptions) -> Result<Evaluation, Error> {
    let outage =
        |link| analytic::outage(link, s, s.gamma_th, opts).map(|o| Evaluation::analytic(o.value, o.method.as_str()));
    let hd = |cond: HdCondition, tag: &str| {
        let r = analytic::rate_hd_semianalytic(s, cond, opts)?;
        Ok(Evaluation {
            mean: r.sum(),
            std_err: None,
            trials: None,
            eval_path: format!("{tag}/integral"),
            err_estimate: Some(r.err_estimate()),
        })
    };
    let gain = |cond: HdCondition, tag: &str| analytic::gain(s, cond, opts).map(|g| Evaluation::analytic(g, tag));
    match metric {
        Metric::OutageDl => outage(Link::Dl),
        Metric::OutageUl => outage(Link::Ul),
        Metric::RateFd => {
            let r = analytic::rate_fd(s, opts)?;
            Ok(Evaluation {
                mean: r.sum(),
                std_err: None,
                trials: None,
                eval_path: format!(
                    "{}/{}+{}/{}",
                    r.ul_method.as_str(),
                    r.ul.path.as_str(),
                    r.dl_method.as_str(),
                    r.dl.path.as_str()
                ),
                err_estimate: Some(r.err_estimate()),
            })
        }
        Metric::RateHdRc => hd(HdCondition::Rc, "hd_rc_semianalytic"),
        Metric::RateHdAc => hd(HdCondition::Ac, "hd_ac_semianalytic"),
        Metric::GainRc => gain(HdCondition::Rc, "gain_rc"),
        Metric::GainAc => gain(HdCondition::Ac, "gain_ac"),
        Metric::OutageDlAsymptotic => Ok(Evaluation {
            mean: analytic::asymptotic_cdf_dl(s.gamma_th, s)?,
            std_err: None,
            trials: None,
            eval_path: "dl_asymptotic/closed_form".to_owned(),
            err_estimate: Some(0.0),
        }),
        Metric::OutageUlAsymptotic => Ok(Evaluation {
            mean: analytic::asymptotic_cdf_ul(s.gamma_th, s)?,
            std_err: None,
            trials: None,
            eval_path: "ul_asymptotic/closed_form".to_owned(),
            err_estimate: Some(0.0),
        }),
        Metric::RateAsymptotic => {
            let ul = analytic::asymptotic_rate_ul(s, opts)?;
            let dl = analytic::asymptotic_rate_dl(s, opts)?;
            Ok(Evaluation {
                mean: ul.value + dl.value,
                std_err: None,
                trials: None,
                eval_path: format!("ul_asymptotic/{}+dl_asymptotic/{}", ul.path.as_str(), dl.path.as_str()),
                err_estimate: Some(ul.err_estimate + dl.err_estimate),
            })
        }
    }
}

/// Evaluates and converts the outcome into a row. Inapplicable evaluators
/// and unstable estimates become value-less rows; numerical failures keep
/// their best estimate under a `no_convergence` tag. Only invalid input is
/// returned as an error.
pub fn evaluate_row(
    s: &Scenario,
    variable: &str,
    value: f64,
    metric: Metric,
    engine: Engine,
    settings: &Settings,
) -> Result<Row, Error> {
    let mut row = Row {
        variable: variable.to_owned(),
        value,
        metric,
        engine,
        mean: None,
        std_err: None,
        trials: None,
        eval_path: String::new(),
        err_estimate: None,
    };
    match evaluate(s, metric, engine, settings) {
        Ok(e) => {
            row.mean = Some(e.mean);
            row.std_err = e.std_err;
            row.trials = e.trials;
            row.eval_path = e.eval_path;
            row.err_estimate = e.err_estimate;
        }
        Err(err @ (Error::NoConvergence { .. } | Error::NonMonotone { .. })) => {
            let best = err.best_estimate().copied();
            row.mean = best.map(|b| b.value);
            row.err_estimate = best.map(|b| b.err_estimate);
            row.eval_path = format!("no_convergence:{}", best.map(|b| b.path.as_str()).unwrap_or("unknown"));
        }
        Err(Error::Domain(_)) => row.eval_path = "n/a".to_owned(),
        Err(Error::Unstable(_)) => {
            row.eval_path = "unstable".to_owned();
            row.trials = Some(settings.trials);
        }
        Err(e @ (Error::Validation { .. } | Error::Parse { .. })) => return Err(e),
    }
    Ok(row)
}
