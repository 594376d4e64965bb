//! Acceptance criteria. Each test prints one `PASS`/`FAIL` line (written
//! straight to stderr so it shows without `--nocapture`) and then asserts.

#[path = "../../core/tests/common/identity.rs"]
mod identity;
#[path = "../../core/tests/common/oracles.rs"]
mod oracles;

use std::io::Write;
use std::process::Command;

use fdcell_cli::eval::Settings;
use fdcell_cli::figure::{self, FigureName};
use fdcell_cli::spec::{Engine, Metric};
use fdcell_cli::validate::{cdf_tolerance, rate_tolerance, z_grid};
use fdcell_core::analytic::{self, EvalOptions};
use fdcell_core::montecarlo::{EstimateWithCI, MonteCarlo, RateMode};
use fdcell_core::{EvalPath, HdCondition, HdPowerPolicy, Link, Scenario, ScenarioConfig, SeriesEval};

const TRIALS: u64 = 1_000_000;
const SEED: u64 = 1;

fn report(n: u32, title: &str, ok: bool, detail: &str) {
    let line = format!("criterion {n} [{}] {title}: {detail}\n", if ok { "PASS" } else { "FAIL" });
    let _ = std::io::stderr().write_all(line.as_bytes());
    assert!(ok, "{line}");
}

fn scenario(edit: impl FnOnce(&mut ScenarioConfig)) -> Scenario {
    let mut c = ScenarioConfig::default();
    edit(&mut c);
    c.validate().unwrap()
}

fn mc() -> MonteCarlo {
    MonteCarlo::default()
}

/// Worst `|analytic − mc| / tolerance` over the grid, with `f` the analytic
/// cdf. Values ≤ 1 pass.
fn cdf_gap(s: &Scenario, link: Link, f: impl Fn(f64) -> SeriesEval) -> f64 {
    let grid = z_grid();
    let curve = mc().estimate_cdf_curve(s, &grid, link, TRIALS, SEED).unwrap();
    curve
        .iter()
        .map(|(z, e)| {
            let a = f(*z);
            (a.value - e.mean).abs() / cdf_tolerance(&a, e)
        })
        .fold(0.0, f64::max)
}

fn rel_gap(analytic: f64, mc: &EstimateWithCI) -> f64 {
    (analytic - mc.mean).abs() / analytic.abs()
}

#[test]
fn criterion_1_analytic_matches_simulation() {
    let s = scenario(|_| {});
    let opts = EvalOptions::default();
    let dl = cdf_gap(&s, Link::Dl, |z| analytic::cdf_dl_general(z, &s, opts).unwrap());
    let ul = cdf_gap(&s, Link::Ul, |z| analytic::cdf_ul_general(z, &s, opts).unwrap());
    let fd = rel_gap(
        analytic::rate_fd(&s, opts).unwrap().sum(),
        &mc().estimate_rates(&s, RateMode::Fd, TRIALS, SEED).unwrap().sum,
    );
    let mut hd = Vec::new();
    for (cond, mode) in [(HdCondition::Rc, RateMode::HdRc), (HdCondition::Ac, RateMode::HdAc)] {
        let an = analytic::rate_hd_semianalytic(&s, cond, opts).unwrap().sum();
        hd.push(rel_gap(an, &mc().estimate_rates(&s, mode, TRIALS, SEED).unwrap().sum));
    }
    let ok = dl <= 1.0 && ul <= 1.0 && fd <= 0.02 && hd.iter().all(|g| *g <= 0.02);
    report(
        1,
        "analytic vs Monte Carlo",
        ok,
        &format!(
            "worst cdf gap / 3-SE tolerance DL {dl:.2}, UL {ul:.2}; rate gaps FD {:.3}%, HD RC {:.3}%, HD AC {:.3}%",
            100.0 * fd,
            100.0 * hd[0],
            100.0 * hd[1]
        ),
    );
}

#[test]
fn criterion_2_series_match_integrals() {
    let checks = identity::series_integral_suite(10, 0x1de0);
    let worst = checks.iter().map(|c| c.worst_rel).fold(0.0, f64::max);
    let detail: Vec<String> = checks.iter().map(|c| format!("{} {:.1e}", c.name, c.worst_rel)).collect();
    report(2, "series vs integral forms", checks.len() == 5 && worst < 1e-4, &detail.join(", "));
}

#[test]
fn criterion_3_bound_directions() {
    let opts = EvalOptions::default();
    let il4 = |d| {
        scenario(|c| {
            c.alpha = 4.0;
            c.noise = 0.0;
            c.d_pair = d;
        })
    };
    let grid = z_grid();
    let mut worst_violation = f64::NEG_INFINITY;
    let mut worst_tight = 0.0f64;
    for (d, tight) in [(25.0, false), (0.0, true)] {
        let s = il4(d);
        let curve = mc().estimate_cdf_curve(&s, &grid, Link::Ul, TRIALS, SEED).unwrap();
        for (z, e) in &curve {
            let lb = analytic::cdf_ul_alpha4_il_lb(*z, &s, EvalPath::Integral, opts).unwrap();
            let t = cdf_tolerance(&lb, e);
            if tight {
                worst_tight = worst_tight.max((lb.value - e.mean).abs() / t);
            } else {
                worst_violation = worst_violation.max((lb.value - e.mean) / t);
            }
        }
    }
    let mut rate_lines = Vec::new();
    let mut rate_ok = true;
    for (d, tight) in [(25.0, false), (0.0, true)] {
        let s = il4(d);
        let ub = analytic::rate_ul_alpha4_il_ub(&s, EvalPath::Integral, opts).unwrap();
        let e = mc().estimate_link_rate(&s, Link::Ul, TRIALS, SEED).unwrap();
        let ok = if tight {
            (ub.value - e.mean).abs() <= rate_tolerance(&ub, &e)
        } else {
            ub.value >= e.mean - 3.0 * e.std_err
        };
        rate_ok &= ok;
        rate_lines.push(format!("d={d}: bound {:.4} vs MC {:.4} ± {:.4}", ub.value, e.mean, e.std_err));
    }
    let ok = worst_violation <= 1.0 && worst_tight <= 1.0 && rate_ok;
    report(
        3,
        "bound directions",
        ok,
        &format!(
            "cdf bound excess / tolerance at d=25 {worst_violation:.2}, |gap| / tolerance at d=0 {worst_tight:.2}; rate {}",
            rate_lines.join("; ")
        ),
    );
}

/// `∫₀^∞ [1 − F(2^t − 1)] dt` with the oracle double-exponential rule.
fn rate_of_cdf(f: impl Fn(f64) -> f64) -> f64 {
    oracles::exp_sinh(|t| 1.0 - f((t * std::f64::consts::LN_2).exp_m1()), 0.0)
}

#[test]
fn criterion_4_asymptotic_forms() {
    let s = scenario(|_| {});
    let opts = EvalOptions::default();
    let ul_sim = scenario(|c| c.sigma_li = 0.0);
    let dl_sim = scenario(|c| c.p_ul_db = f64::NEG_INFINITY);
    let exact = |v: f64| SeriesEval::exact(v, EvalPath::Series);
    let ul = cdf_gap(&ul_sim, Link::Ul, |z| exact(analytic::asymptotic_cdf_ul(z, &s).unwrap()));
    let dl = cdf_gap(&dl_sim, Link::Dl, |z| exact(analytic::asymptotic_cdf_dl(z, &s).unwrap()));
    let r_ul = analytic::asymptotic_rate_ul(&s, opts).unwrap().value;
    let r_dl = analytic::asymptotic_rate_dl(&s, opts).unwrap().value;
    let g_ul = rel_gap(r_ul, &mc().estimate_link_rate(&ul_sim, Link::Ul, TRIALS, SEED).unwrap());
    let g_dl = rel_gap(r_dl, &mc().estimate_link_rate(&dl_sim, Link::Dl, TRIALS, SEED).unwrap());

    let s4 = scenario(|c| c.alpha = 4.0);
    let own = [
        (r_ul, rate_of_cdf(|y| analytic::asymptotic_cdf_ul(y, &s).unwrap())),
        (r_dl, rate_of_cdf(|y| analytic::asymptotic_cdf_dl(y, &s).unwrap())),
        (
            analytic::asymptotic_rate_dl(&s4, opts).unwrap().value,
            rate_of_cdf(|y| analytic::asymptotic_cdf_dl(y, &s4).unwrap()),
        ),
    ];
    let own_gap = own.iter().map(|(a, b)| (a - b).abs() / b.abs()).fold(0.0, f64::max);
    let ok = ul <= 1.0 && dl <= 1.0 && g_ul <= 0.02 && g_dl <= 0.02 && own_gap <= 1e-4;
    report(
        4,
        "asymptotic forms",
        ok,
        &format!(
            "cdf gap / tolerance UL {ul:.2}, DL {dl:.2}; rate gaps UL {:.3}%, DL {:.3}%; rate vs own cdf integral {own_gap:.1e}",
            100.0 * g_ul,
            100.0 * g_dl
        ),
    );
}

#[test]
fn criterion_5_gain_crossover() {
    let opts = EvalOptions::with_tol(1e-7);
    let gain = |p_ul_db: f64, sigma_db: f64| {
        let s = scenario(|c| {
            c.p_ul_db = p_ul_db;
            c.sigma_li = 10f64.powf(sigma_db / 10.0);
            c.hd_power_policy = HdPowerPolicy::Power;
        });
        analytic::gain(&s, HdCondition::Ac, opts).unwrap().value
    };
    let (mut lo, mut hi) = (-10.0, 0.0);
    let (g_lo, g_hi) = (gain(25.0, lo), gain(25.0, hi));
    let brackets = g_lo > 0.0 && g_hi < 0.0;
    if brackets {
        for _ in 0..8 {
            let mid = 0.5 * (lo + hi);
            if gain(25.0, mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
    }
    let crossover = 0.5 * (lo + hi);
    // FD stays ahead in the asymmetric case at every point where the
    // symmetric case has already lost, up to the top of the range.
    let asym: Vec<(f64, f64)> =
        [crossover - 20.0, crossover, crossover + 5.0, 10.0].iter().map(|&x| (x, gain(12.0, x))).collect();
    let wider = asym.iter().all(|&(_, g)| g > 0.0);
    let ok = brackets && wider;
    let asym_text: Vec<String> = asym.iter().map(|(x, g)| format!("{x:.1} dB: {g:.3}")).collect();
    report(
        5,
        "gain crossover",
        ok,
        &format!(
            "symmetric AC gain {g_lo:.4} at -10 dB, {g_hi:.4} at 0 dB, sign change near {crossover:.2} dB; asymmetric gains {}",
            asym_text.join(", ")
        ),
    );
}

#[test]
fn criterion_6_rate_approaches_asymptote() {
    let opts = EvalOptions::default();
    let mut gaps = Vec::new();
    for d in [25.0, 50.0, 100.0, 150.0] {
        let s = scenario(|c| c.d_pair = d);
        let fd = mc().estimate_rates(&s, RateMode::Fd, TRIALS, SEED).unwrap().sum;
        let asym = analytic::asymptotic_rate_ul(&s, opts).unwrap().value
            + analytic::asymptotic_rate_dl(&s, opts).unwrap().value;
        gaps.push((fd.mean - asym).abs());
    }
    let ok = gaps.windows(2).all(|w| w[1] < w[0]);
    let text: Vec<String> = gaps.iter().map(|g| format!("{g:.4}")).collect();
    report(6, "rate approaches asymptotic sum", ok, &format!("gaps at d = 25, 50, 100, 150: {}", text.join(", ")));
}

#[test]
fn criterion_7_nearest_user_beats_random() {
    let recipe = figure::recipe(FigureName::Fig2);
    let settings = Settings { trials: 200_000, ..Default::default() };
    let groups = figure::evaluate(&recipe, &settings, Some(&[Engine::Mc])).unwrap();
    let rows = |g: &str| groups.iter().find(|(l, _)| *l == g).unwrap().1.clone();
    let (nus, rus) = (rows("nus"), rows("rus"));
    let mut compared = 0;
    let mut worst = f64::NEG_INFINITY;
    for n in nus.iter().filter(|r| matches!(r.metric, Metric::OutageDl | Metric::OutageUl)) {
        let r = rus.iter().find(|r| r.metric == n.metric && r.value == n.value).unwrap();
        let slack = 3.0 * n.std_err.unwrap().hypot(r.std_err.unwrap()).max(1.0 / settings.trials as f64);
        worst = worst.max((n.mean.unwrap() - r.mean.unwrap()) / slack);
        compared += 1;
    }
    report(
        7,
        "nearest-user outage below random-user outage",
        compared == 22 && worst <= 1.0,
        &format!("{compared} power/link points, worst (NUS − RUS) / 3 SE = {worst:.2}"),
    );
}

#[test]
fn criterion_8_special_function_oracles() {
    let checks = oracles::random_point_suite(100, 0x5eed);
    let worst = checks.iter().map(|c| c.worst_rel).fold(0.0, f64::max);
    let closed = oracles::closed_form_checks();
    let closed_worst = closed.iter().map(|(_, got, want)| ((got - want) / want).abs()).fold(0.0, f64::max);
    let ok = checks.iter().all(|c| c.points >= 100 && c.passed(1e-6)) && closed.len() == 3 && closed_worst <= 1e-9;
    report(
        8,
        "special-function oracles",
        ok,
        &format!("{} functions, worst relative error {worst:.1e}; closed forms worst {closed_worst:.1e}", checks.len()),
    );
}

#[test]
fn criterion_9_thread_count_does_not_change_output() {
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for threads in [1, 4, 8] {
        let out = dir.path().join(format!("t{threads}"));
        let status = Command::new(env!("CARGO_BIN_EXE_fdcell"))
            .stdout(std::process::Stdio::null())
            .args(["--trials", "50000", "--seed", "7", "--threads", &threads.to_string(), "sweep"])
            .args(["--variable", "p_ap_db", "--values", "0:40:10", "--outputs", "outage_dl,outage_ul,rate_hd_ac"])
            .arg("--out")
            .arg(&out)
            .status()
            .unwrap();
        assert!(status.success());
        outputs.push(std::fs::read(out.join("sweep.csv")).unwrap());
    }
    let ok = outputs.windows(2).all(|w| w[0] == w[1]) && !outputs[0].is_empty();
    report(
        9,
        "determinism across thread counts",
        ok,
        &format!("{} bytes of CSV, identical under 1, 4 and 8 threads: {ok}", outputs[0].len()),
    );
}
