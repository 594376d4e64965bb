//! Series forms against their integral counterparts on random
//! interference-limited scenarios with a small mean user count.

#![allow(dead_code)]

use fdcell_core::analytic::{
    cdf_dl_il, cdf_ul_alpha2_il, cdf_ul_alpha4_il_lb, rate_dl_il, rate_ul_alpha4_il_ub, EvalOptions,
};
use fdcell_core::{EvalPath, Result, Scenario, ScenarioConfig, SeriesEval};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone)]
pub struct IdentityCheck {
    pub name: &'static str,
    pub points: usize,
    pub worst_rel: f64,
    pub worst_at: String,
}

fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    rng.random_range(lo.ln()..hi.ln()).exp()
}

/// A random interference-limited scenario with `λπR² ≤ 20`.
pub fn random_il_scenario(rng: &mut ChaCha8Rng, alpha: f64) -> Scenario {
    let lambda_d = log_uniform(rng, 1e-4, 2e-3);
    let mean_users = rng.random_range(0.5..20.0);
    let r_cell = (mean_users / (lambda_d * std::f64::consts::PI)).sqrt();
    ScenarioConfig {
        lambda_d,
        r_cell,
        d_pair: rng.random_range(0.05..1.0) * r_cell,
        alpha,
        p_ap_db: rng.random_range(0.0..30.0),
        p_ul_db: rng.random_range(0.0..30.0),
        sigma_li: log_uniform(rng, 1e-3, 10.0),
        noise: 0.0,
        ..Default::default()
    }
    .validate()
    .expect("random scenario is valid")
}

type Eval = fn(&Scenario, f64, EvalPath, EvalOptions) -> Result<SeriesEval>;

pub fn series_integral_suite(n: usize, seed: u64) -> Vec<IdentityCheck> {
    let cases: [(&'static str, f64, bool, Eval); 5] = [
        ("alpha=2 uplink cdf", 2.0, true, |s, z, p, o| cdf_ul_alpha2_il(z, s, p, o)),
        ("alpha=4 uplink cdf lower bound", 4.0, true, |s, z, p, o| cdf_ul_alpha4_il_lb(z, s, p, o)),
        ("interference-limited downlink cdf", 2.0, true, |s, z, p, o| cdf_dl_il(z, s, p, o)),
        ("alpha=4 uplink rate upper bound", 4.0, false, |s, _, p, o| rate_ul_alpha4_il_ub(s, p, o)),
        ("interference-limited downlink rate", 4.0, false, |s, _, p, o| rate_dl_il(s, p, o)),
    ];
    let opts = EvalOptions::with_tol(1e-9);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    cases
        .iter()
        .enumerate()
        .map(|(i, &(name, alpha, takes_z, eval))| {
            let mut worst = (0.0, String::new());
            for _ in 0..n {
                // Alternate the downlink cases between α = 2 and α = 4.
                let alpha = if (i == 2 || i == 4) && rng.random::<bool>() { 6.0 - alpha } else { alpha };
                let s = random_il_scenario(&mut rng, alpha);
                let z = if takes_z { log_uniform(&mut rng, 0.05, 20.0) } else { f64::NAN };
                let at = format!(
                    "lambda={:.3e} R={:.1} d={:.1} alpha={} P_AP={:.1}dB P_U={:.1}dB sigma={:.3e} z={z:.3}",
                    s.lambda_d, s.r_cell, s.d_pair, s.alpha, s.p_ap_db, s.p_ul_db, s.sigma_li
                );
                let rel = match (eval(&s, z, EvalPath::Series, opts), eval(&s, z, EvalPath::Integral, opts)) {
                    (Ok(a), Ok(b)) => (a.value - b.value).abs() / b.value.abs().max(f64::MIN_POSITIVE),
                    (a, b) => {
                        let msg = format!("{at}: series {:?}, integral {:?}", a.err(), b.err());
                        worst = (f64::INFINITY, msg);
                        continue;
                    }
                };
                if !(rel <= worst.0) {
                    worst = (rel, at);
                }
            }
            IdentityCheck { name, points: n, worst_rel: worst.0, worst_at: worst.1 }
        })
        .collect()
}
