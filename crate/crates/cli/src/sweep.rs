//! Sweep execution.

use std::path::{Path, PathBuf};

use fdcell_core::{Scenario, ScenarioConfig};

use crate::eval::{evaluate_row, Row, Settings};
use crate::spec::SweepSpec;
use crate::{output, ConvergenceFailure};

/// Builds the validated scenario of every sweep point up front, so a bad
/// value is reported before any work is done.
pub fn points(base: &ScenarioConfig, spec: &SweepSpec) -> anyhow::Result<Vec<(f64, Scenario)>> {
    spec.check()?;
    spec.values
        .iter()
        .map(|&v| {
            let mut cfg = base.clone();
            cfg.set(&spec.variable, v)?;
            let s =
                cfg.validate().map_err(|e| anyhow::Error::from(e).context(format!("at {} = {v}", spec.variable)))?;
            Ok((v, s))
        })
        .collect()
}

/// Evaluates every (value, metric, engine) combination, in that nesting
/// order. Every point uses the same seed.
pub fn run(base: &ScenarioConfig, spec: &SweepSpec, settings: &Settings) -> anyhow::Result<Vec<Row>> {
    let mut rows = Vec::new();
    for (v, s) in points(base, spec)? {
        for &m in &spec.outputs {
            for &e in &spec.engines {
                rows.push(evaluate_row(&s, &spec.variable, v, m, e, settings)?);
            }
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone)]
pub struct SweepReport {
    pub rows: Vec<Row>,
    pub csv: PathBuf,
    pub files: Vec<PathBuf>,
}

impl SweepReport {
    pub fn convergence_failures(&self) -> usize {
        self.rows.iter().filter(|r| r.is_convergence_failure()).count()
    }

    /// Err when any row is a convergence failure; the files are already
    /// written at that point.
    pub fn into_result(self) -> anyhow::Result<()> {
        match self.convergence_failures() {
            0 => Ok(()),
            n => Err(ConvergenceFailure { rows: n }.into()),
        }
    }
}

/// Runs a sweep and writes `<stem>.csv` plus one SVG per metric.
pub fn run_to_dir(
    base: &ScenarioConfig,
    spec: &SweepSpec,
    settings: &Settings,
    dir: &Path,
    stem: &str,
) -> anyhow::Result<SweepReport> {
    let rows = run(base, spec, settings)?;
    let files = output::write_sweep(dir, stem, &rows, &spec.variable)?;
    Ok(SweepReport { csv: files[0].clone(), rows, files })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spec::{Engine, Metric};
    use crate::ExitStatus;

    fn spec(variable: &str, values: Vec<f64>) -> SweepSpec {
        SweepSpec { variable: variable.into(), values, outputs: vec![Metric::OutageDl], engines: vec![Engine::Mc] }
    }

    #[test]
    fn invalid_points_fail_before_evaluation() {
        let err = run(&ScenarioConfig::default(), &spec("delta", vec![0.5, 1.5]), &Settings::default()).unwrap_err();
        assert_eq!(ExitStatus::of(&err), ExitStatus::InputError);
        let err = run(&ScenarioConfig::default(), &spec("delta", vec![]), &Settings::default()).unwrap_err();
        assert_eq!(ExitStatus::of(&err), ExitStatus::InputError);
    }

    #[test]
    fn outage_falls_with_power() {
        let st = Settings { trials: 20_000, ..Default::default() };
        let rows = run(&ScenarioConfig::default(), &spec("p_ap_db", vec![0.0, 20.0, 40.0]), &st).unwrap();
        let m: Vec<f64> = rows.iter().map(|r| r.mean.unwrap()).collect();
        assert!(m[0] >= m[1] && m[1] >= m[2], "{m:?}");
    }
}
