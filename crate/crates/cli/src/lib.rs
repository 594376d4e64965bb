//! Command-line front end: parameter sweeps, analytic-vs-simulation
//! validation and the figure recipes.

use std::fmt;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub mod eval;
pub mod figure;
pub mod output;
pub mod plot;
pub mod spec;
pub mod sweep;
pub mod validate;

pub use eval::{Row, Settings};
pub use spec::{Engine, Metric, SweepSpec};

/// Malformed command-line or sweep input.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InputError(pub String);

impl InputError {
    pub fn new(msg: impl Into<String>) -> Self {
        InputError(msg.into())
    }
}

impl fmt::Display for InputError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for InputError {}

/// Some evaluations did not converge; their rows carry best estimates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConvergenceFailure {
    pub rows: usize,
}

impl fmt::Display for ConvergenceFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} evaluation(s) did not converge; see rows tagged no_convergence", self.rows)
    }
}

impl std::error::Error for ConvergenceFailure {}

/// At least one validation comparison failed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComparisonFailure {
    pub failed: usize,
    pub total: usize,
}

impl fmt::Display for ComparisonFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} of {} comparisons failed", self.failed, self.total)
    }
}

impl std::error::Error for ComparisonFailure {}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Success = 0,
    ComparisonFailed = 1,
    InputError = 2,
    NoConvergence = 3,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        self as i32
    }

    /// Maps an error to its exit status. Anything unrecognized (I/O
    /// problems included) counts as an input error.
    pub fn of(err: &anyhow::Error) -> Self {
        use fdcell_core::Error as E;
        for cause in err.chain() {
            if cause.is::<ComparisonFailure>() {
                return ExitStatus::ComparisonFailed;
            }
            if cause.is::<ConvergenceFailure>() {
                return ExitStatus::NoConvergence;
            }
            if let Some(e) = cause.downcast_ref::<E>() {
                return match e {
                    E::NoConvergence { .. } | E::NonMonotone { .. } => ExitStatus::NoConvergence,
                    _ => ExitStatus::InputError,
                };
            }
        }
        ExitStatus::InputError
    }
}

#[derive(Debug, Parser)]
#[command(name = "fdcell", version, about = "Full-duplex cellular outage and rate laboratory")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalArgs {
    /// Monte Carlo trials per estimate [default: 1000000 for validate,
    /// 100000 otherwise].
    #[arg(long, global = true)]
    pub trials: Option<u64>,
    /// Base seed of every Monte Carlo estimate.
    #[arg(long, global = true, env = "FDCELL_SEED", default_value_t = 1)]
    pub seed: u64,
    /// Relative tolerance of the analytic quadratures.
    #[arg(long, global = true, default_value_t = 1e-8)]
    pub tol: f64,
    /// Worker threads for Monte Carlo (results do not depend on it).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

impl GlobalArgs {
    pub fn settings(&self, default_trials: u64) -> Result<Settings, InputError> {
        let trials = self.trials.unwrap_or(default_trials);
        if trials == 0 {
            return Err(InputError::new("--trials must be positive"));
        }
        if !(self.tol > 0.0 && self.tol < 1.0) {
            return Err(InputError::new("--tol must lie in (0, 1)"));
        }
        if self.threads == Some(0) {
            return Err(InputError::new("--threads must be positive"));
        }
        Ok(Settings { trials, seed: self.seed, tol: self.tol, threads: self.threads })
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sweep one scenario field and write a CSV plus one SVG per metric.
    Sweep(SweepArgs),
    /// Compare every applicable analytic evaluator against simulation.
    Validate {
        /// Scenario file; defaults apply when omitted.
        #[arg(long)]
        scenario: Option<PathBuf>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Regenerate one of the reference figures.
    Figure {
        name: figure::FigureName,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Restrict the recipe to these engines (comma-separated).
        #[arg(long)]
        engines: Option<String>,
    },
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Scenario file; defaults apply when omitted.
    #[arg(long)]
    pub scenario: Option<PathBuf>,
    /// Sweep spec file. Individual flags below override its entries.
    #[arg(long)]
    pub spec: Option<PathBuf>,
    #[arg(long)]
    pub variable: Option<String>,
    /// Comma list or inclusive `start:stop:step`.
    #[arg(long, allow_hyphen_values = true)]
    pub values: Option<String>,
    #[arg(long)]
    pub outputs: Option<String>,
    #[arg(long)]
    pub engines: Option<String>,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

fn load_scenario(path: Option<&PathBuf>) -> anyhow::Result<fdcell_core::ScenarioConfig> {
    use anyhow::Context;
    match path {
        None => Ok(Default::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            let cfg = fdcell_core::ScenarioConfig::parse(&text).with_context(|| format!("in {}", p.display()))?;
            cfg.validate()?;
            Ok(cfg)
        }
    }
}

impl SweepArgs {
    fn resolve(&self) -> anyhow::Result<SweepSpec> {
        use anyhow::Context;
        let mut spec = match &self.spec {
            Some(p) => {
                let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
                Some(SweepSpec::parse(&text)?)
            }
            None => None,
        };
        let missing = |what: &str| InputError::new(format!("sweep needs --{what} or a spec file providing it"));
        let variable = match (&self.variable, &spec) {
            (Some(v), _) => v.clone(),
            (None, Some(s)) => s.variable.clone(),
            (None, None) => return Err(missing("variable").into()),
        };
        let values = match (&self.values, &spec) {
            (Some(v), _) => spec::parse_values(v)?,
            (None, Some(s)) => s.values.clone(),
            (None, None) => return Err(missing("values").into()),
        };
        let outputs = match (&self.outputs, &spec) {
            (Some(v), _) => spec::parse_list(v)?,
            (None, Some(s)) => s.outputs.clone(),
            (None, None) => return Err(missing("outputs").into()),
        };
        let engines = match (&self.engines, spec.take()) {
            (Some(v), _) => spec::parse_list(v)?,
            (None, Some(s)) => s.engines,
            (None, None) => vec![Engine::Mc, Engine::Analytic],
        };
        let spec = SweepSpec { variable, values, outputs, engines };
        spec.check()?;
        Ok(spec)
    }
}

/// Validation compares at many points, so it defaults to more trials to
/// keep 3-SE false alarms rare.
pub const VALIDATE_TRIALS: u64 = 1_000_000;

/// Runs a parsed command and prints a short summary to stdout.
pub fn run(cli: Cli) -> anyhow::Result<()> {
    let default_trials = match cli.command {
        Command::Validate { .. } => VALIDATE_TRIALS,
        _ => Settings::default().trials,
    };
    let settings = cli.global.settings(default_trials)?;
    match cli.command {
        Command::Sweep(args) => {
            let base = load_scenario(args.scenario.as_ref())?;
            let spec = args.resolve()?;
            let report = sweep::run_to_dir(&base, &spec, &settings, &args.out, "sweep")?;
            println!("wrote {} rows to {}", report.rows.len(), report.csv.display());
            report.into_result()
        }
        Command::Validate { scenario, out } => {
            let cfg = load_scenario(scenario.as_ref())?;
            let report = validate::validate(&cfg.validate()?, &settings, &validate::no_tamper)?;
            let path = report.write(&out)?;
            print!("{}", report.summary());
            println!("report written to {}", path.display());
            report.into_result()
        }
        Command::Figure { name, out, engines } => {
            let engines = engines.map(|e| spec::parse_list(&e)).transpose()?;
            let report = figure::run(name, &settings, engines.as_deref(), &out)?;
            for p in &report.files {
                println!("wrote {}", p.display());
            }
            report.into_result()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_follow_error_kind() {
        let e: anyhow::Error = InputError::new("x").into();
        assert_eq!(ExitStatus::of(&e), ExitStatus::InputError);
        let e: anyhow::Error = ConvergenceFailure { rows: 1 }.into();
        assert_eq!(ExitStatus::of(&e).code(), 3);
        let e: anyhow::Error = ComparisonFailure { failed: 1, total: 2 }.into();
        assert_eq!(ExitStatus::of(&e).code(), 1);
        let e = anyhow::Error::from(fdcell_core::Error::Domain("d".into())).context("wrapped");
        assert_eq!(ExitStatus::of(&e), ExitStatus::InputError);
    }

    #[test]
    fn flags_parse() {
        let cli = Cli::try_parse_from([
            "fdcell",
            "--trials",
            "10",
            "sweep",
            "--variable",
            "p_db",
            "--values",
            "-5:5:5",
            "--outputs",
            "outage_dl",
        ])
        .unwrap();
        assert_eq!(cli.global.settings(5).unwrap().trials, 10);
        let Command::Sweep(args) = cli.command else { panic!() };
        let spec = args.resolve().unwrap();
        assert_eq!(spec.values, vec![-5.0, 0.0, 5.0]);
        assert_eq!(spec.engines.len(), 2);
    }
}
