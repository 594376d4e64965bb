//! Hard-coded recipes for the four reference figures.

use std::path::{Path, PathBuf};

use fdcell_core::{HdPowerPolicy, ScenarioConfig, Selection};

use crate::eval::{evaluate_row, Row, Settings};
use crate::output::{self, write_csv, write_svg};
use crate::plot::Chart;
use crate::spec::{Engine, Metric, SweepSpec};
use crate::{sweep, ConvergenceFailure};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum FigureName {
    /// Outage against transmit SNR, nearest and random user selection.
    Fig2,
    /// Sum rate against the HD time split, symmetric and asymmetric powers.
    Fig3,
    /// Sum rate against the pair distance with the asymptotic reference.
    Fig4,
    /// FD-over-HD gain against loopback interference.
    Fig5,
}

impl FigureName {
    pub fn as_str(self) -> &'static str {
        match self {
            FigureName::Fig2 => "fig2",
            FigureName::Fig3 => "fig3",
            FigureName::Fig4 => "fig4",
            FigureName::Fig5 => "fig5",
        }
    }
}

/// One scenario variant of a figure, swept over the figure's variable.
#[derive(Debug, Clone)]
pub struct Group {
    pub label: &'static str,
    pub config: ScenarioConfig,
    pub jobs: Vec<(Metric, Vec<Engine>)>,
    /// Draw this group's analytic curves dashed.
    pub dashed: bool,
}

#[derive(Debug, Clone)]
pub struct Recipe {
    pub name: FigureName,
    pub variable: &'static str,
    pub x_label: &'static str,
    pub values: Vec<f64>,
    pub groups: Vec<Group>,
    /// `(file suffix, title, log scale, [(group, metric)])`.
    pub charts: Vec<ChartSpec>,
}

#[derive(Debug, Clone)]
pub struct ChartSpec {
    pub suffix: &'static str,
    pub title: String,
    pub y_label: &'static str,
    pub log_y: bool,
    pub curves: Vec<(&'static str, Metric)>,
}

fn range(start: f64, stop: f64, step: f64) -> Vec<f64> {
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    (0..=n).map(|i| start + i as f64 * step).collect()
}

const BOTH: [Engine; 2] = [Engine::Mc, Engine::Analytic];

fn jobs(metrics: &[Metric], engines: &[Engine]) -> Vec<(Metric, Vec<Engine>)> {
    metrics.iter().map(|&m| (m, engines.to_vec())).collect()
}

fn config(edit: impl FnOnce(&mut ScenarioConfig)) -> ScenarioConfig {
    let mut c = ScenarioConfig::default();
    edit(&mut c);
    c
}

pub fn recipe(name: FigureName) -> Recipe {
    use Metric::*;
    match name {
        FigureName::Fig2 => {
            let mut nus = jobs(&[OutageDl, OutageUl], &BOTH);
            nus.extend(jobs(&[OutageDlAsymptotic, OutageUlAsymptotic], &[Engine::Analytic]));
            Recipe {
                name,
                variable: "p_db",
                x_label: "transmit SNR P_AP = P_U (dB)",
                values: range(0.0, 50.0, 5.0),
                groups: vec![
                    Group { label: "nus", config: config(|_| {}), jobs: nus, dashed: false },
                    Group {
                        label: "rus",
                        config: config(|c| c.selection = Selection::Rus),
                        jobs: jobs(&[OutageDl, OutageUl], &[Engine::Mc]),
                        dashed: false,
                    },
                ],
                charts: [
                    (OutageDl, OutageDlAsymptotic, "dl", "downlink"),
                    (OutageUl, OutageUlAsymptotic, "ul", "uplink"),
                ]
                .into_iter()
                .map(|(m, a, suffix, title)| ChartSpec {
                    suffix,
                    title: format!("{title} outage, d = 25, threshold 3 dB"),
                    y_label: m.label(),
                    log_y: true,
                    curves: vec![("nus", m), ("nus", a), ("rus", m)],
                })
                .collect(),
            }
        }
        FigureName::Fig3 => {
            let rates = [RateFd, RateHdRc, RateHdAc];
            let group = |label, p_ul_db, sigma_li| Group {
                label,
                config: config(|c| {
                    c.p_ul_db = p_ul_db;
                    c.sigma_li = sigma_li;
                    c.hd_power_policy = HdPowerPolicy::Energy;
                }),
                jobs: jobs(&rates, &BOTH),
                dashed: sigma_li > 0.0,
            };
            let chart = |suffix, title: &str, a, b| ChartSpec {
                suffix,
                title: title.to_owned(),
                y_label: "sum rate (bit/s/Hz)",
                log_y: false,
                curves: vec![(a, RateFd), (b, RateFd), (a, RateHdRc), (a, RateHdAc)],
            };
            Recipe {
                name,
                variable: "delta",
                x_label: "HD time split δ",
                values: range(0.1, 0.9, 0.1),
                groups: vec![
                    group("sym_sigma0", 25.0, 0.0),
                    group("sym_sigma0.1", 25.0, 0.1),
                    group("asym_sigma0", 12.0, 0.0),
                    group("asym_sigma0.1", 12.0, 0.1),
                ],
                charts: vec![
                    chart("sym", "P_AP = P_U = 25 dB", "sym_sigma0", "sym_sigma0.1"),
                    chart("asym", "P_AP = 25 dB, P_U = 12 dB", "asym_sigma0", "asym_sigma0.1"),
                ],
            }
        }
        FigureName::Fig4 => {
            let mut j = jobs(&[RateFd, RateHdRc, RateHdAc], &BOTH);
            j.push((RateAsymptotic, vec![Engine::Analytic]));
            Recipe {
                name,
                variable: "d_pair",
                x_label: "pair distance d (m)",
                values: range(25.0, 150.0, 25.0),
                groups: vec![Group {
                    label: "main",
                    config: config(|c| c.hd_power_policy = HdPowerPolicy::Power),
                    jobs: j,
                    dashed: false,
                }],
                charts: vec![ChartSpec {
                    suffix: "rates",
                    title: "sum rate, δ = 0.5, σ = 0.1".to_owned(),
                    y_label: "sum rate (bit/s/Hz)",
                    log_y: false,
                    curves: vec![("main", RateFd), ("main", RateAsymptotic), ("main", RateHdRc), ("main", RateHdAc)],
                }],
            }
        }
        FigureName::Fig5 => {
            let group = |label, p_ul_db, noise| Group {
                label,
                config: config(|c| {
                    c.p_ul_db = p_ul_db;
                    c.noise = noise;
                    c.hd_power_policy = HdPowerPolicy::Power;
                }),
                jobs: jobs(&[GainRc, GainAc], &BOTH),
                dashed: noise == 0.0,
            };
            let chart = |m: Metric, suffix| ChartSpec {
                suffix,
                title: format!("{m}, d = 25, δ = 0.5"),
                y_label: m.label(),
                log_y: false,
                curves: vec![("sym", m), ("sym_il", m), ("asym", m), ("asym_il", m)],
            };
            Recipe {
                name,
                variable: "sigma_li_db",
                x_label: "loopback interference σ (dB)",
                values: range(-30.0, 10.0, 5.0),
                groups: vec![
                    group("sym", 25.0, 1.0),
                    group("sym_il", 25.0, 0.0),
                    group("asym", 12.0, 1.0),
                    group("asym_il", 12.0, 0.0),
                ],
                charts: vec![chart(GainRc, "gain_rc"), chart(GainAc, "gain_ac")],
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct FigureReport {
    /// Rows of each group, in recipe order.
    pub groups: Vec<(&'static str, Vec<Row>)>,
    pub files: Vec<PathBuf>,
}

impl FigureReport {
    pub fn rows(&self, group: &str) -> Option<&[Row]> {
        self.groups.iter().find(|(g, _)| *g == group).map(|(_, r)| r.as_slice())
    }

    pub fn into_result(self) -> anyhow::Result<()> {
        let n = self.groups.iter().flat_map(|(_, r)| r).filter(|r| r.is_convergence_failure()).count();
        match n {
            0 => Ok(()),
            rows => Err(ConvergenceFailure { rows }.into()),
        }
    }
}

/// Evaluates a recipe without writing anything. `engines` restricts every
/// job to the listed engines.
pub fn evaluate(
    recipe: &Recipe,
    settings: &Settings,
    engines: Option<&[Engine]>,
) -> anyhow::Result<Vec<(&'static str, Vec<Row>)>> {
    let mut out = Vec::new();
    for g in &recipe.groups {
        let spec = SweepSpec {
            variable: recipe.variable.to_owned(),
            values: recipe.values.clone(),
            outputs: g.jobs.iter().map(|(m, _)| *m).collect(),
            engines: BOTH.to_vec(),
        };
        let mut rows = Vec::new();
        for (v, s) in sweep::points(&g.config, &spec)? {
            for (m, es) in &g.jobs {
                for &e in es.iter().filter(|e| engines.is_none_or(|keep| keep.contains(e))) {
                    rows.push(evaluate_row(&s, recipe.variable, v, *m, e, settings)?);
                }
            }
        }
        out.push((g.label, rows));
    }
    Ok(out)
}

fn build_chart(recipe: &Recipe, spec: &ChartSpec, groups: &[(&'static str, Vec<Row>)]) -> Chart {
    let mut series = Vec::new();
    for &(label, metric) in &spec.curves {
        let Some((_, rows)) = groups.iter().find(|(g, _)| *g == label) else { continue };
        let dashed = recipe.groups.iter().any(|g| g.label == label && g.dashed);
        for engine in BOTH {
            let mut s = output::series(rows, metric, engine, format!("{label} {metric} {engine}"));
            s.dashed = dashed
                || matches!(metric, Metric::OutageDlAsymptotic | Metric::OutageUlAsymptotic | Metric::RateAsymptotic);
            if !s.points.is_empty() {
                series.push(s);
            }
        }
    }
    Chart {
        title: format!("{}: {}", recipe.name.as_str(), spec.title),
        x_label: recipe.x_label.to_owned(),
        y_label: spec.y_label.to_owned(),
        log_y: spec.log_y,
        series,
    }
}

/// Runs a figure recipe and writes one CSV per group and its SVG charts.
pub fn run(
    name: FigureName,
    settings: &Settings,
    engines: Option<&[Engine]>,
    dir: &Path,
) -> anyhow::Result<FigureReport> {
    let recipe = recipe(name);
    let groups = evaluate(&recipe, settings, engines)?;
    let mut files = Vec::new();
    for (label, rows) in &groups {
        let p = dir.join(format!("{}_{label}.csv", name.as_str()));
        write_csv(&p, rows)?;
        files.push(p);
    }
    for spec in &recipe.charts {
        let p = dir.join(format!("{}_{}.svg", name.as_str(), spec.suffix));
        write_svg(&p, &build_chart(&recipe, spec, &groups))?;
        files.push(p);
    }
    Ok(FigureReport { groups, files })
}
