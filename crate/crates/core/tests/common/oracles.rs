//! Brute-force reference implementations for the special functions.
//!
//! These deliberately share no code with the library: every value comes
//! from double-exponential quadrature or a direct power series.

#![allow(dead_code)]

use std::f64::consts::{FRAC_PI_2, PI};

use fdcell_core::specfun::{
    alternating_series_sum, appell_f1, erfc, erfcx, exp_integral_ei, gauss_2f1_unit, parabolic_d_m1, quad_adaptive,
    rate_kernel_g,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Runs a trapezoidal sum over `t ∈ [−t_max, t_max]` in the transformed
/// variable, halving the step until successive sums agree.
fn double_exponential(node: impl Fn(f64) -> f64, t_max: f64) -> f64 {
    let mut h = 0.5;
    let mut sum = node(0.0);
    let mut k = 1;
    while k as f64 * h <= t_max {
        sum += node(k as f64 * h) + node(-(k as f64) * h);
        k += 1;
    }
    let mut prev = sum * h;
    for _ in 0..9 {
        // Add the midpoints of the current grid.
        let mut extra = 0.0;
        let mut t = h / 2.0;
        while t <= t_max {
            extra += node(t) + node(-t);
            t += h;
        }
        sum += extra;
        h /= 2.0;
        let cur = sum * h;
        if (cur - prev).abs() <= 1e-14 * cur.abs() {
            return cur;
        }
        prev = cur;
    }
    prev
}

/// Tanh-sinh rule on `[a, b]`; endpoint singularities are resolved since the
/// nodes are formed from their distance to the nearest endpoint.
pub fn tanh_sinh(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let len = b - a;
    double_exponential(
        |t| {
            let u = FRAC_PI_2 * t.sinh();
            // Distance to the closer endpoint: len / (1 + e^{2|u|}).
            let gap = len / (1.0 + (2.0 * u.abs()).exp());
            if gap == 0.0 {
                return 0.0;
            }
            let x = if u < 0.0 { a + gap } else { b - gap };
            let cosh_u = u.cosh();
            let w = len / 2.0 * FRAC_PI_2 * t.cosh() / (cosh_u * cosh_u);
            let v = w * f(x);
            if v.is_finite() {
                v
            } else {
                0.0
            }
        },
        6.5,
    )
}

/// Exp-sinh rule on `[a, ∞)`.
pub fn exp_sinh(f: impl Fn(f64) -> f64, a: f64) -> f64 {
    double_exponential(
        |t| {
            let e = FRAC_PI_2 * t.sinh();
            if e > 700.0 {
                return 0.0;
            }
            let y = e.exp();
            let v = y * FRAC_PI_2 * t.cosh() * f(a + y);
            if v.is_finite() {
                v
            } else {
                0.0
            }
        },
        6.0,
    )
}

pub fn oracle_erfc(x: f64) -> f64 {
    let gauss = |t: f64| 2.0 / PI.sqrt() * (-t * t).exp();
    if x >= 0.0 {
        exp_sinh(gauss, x)
    } else {
        1.0 + tanh_sinh(gauss, 0.0, -x)
    }
}

/// `D₋₁(x) = e^{−x²/4} ∫₀^∞ e^{−xt − t²/2} dt`.
pub fn oracle_d_m1(x: f64) -> f64 {
    (-x * x / 4.0).exp() * exp_sinh(|t| (-x * t - t * t / 2.0).exp(), 0.0)
}

/// `Ei(x) = γ + ln|x| + ∫₀^x (e^t − 1)/t dt` for `x > 0`, `−E₁(−x)` below.
pub fn oracle_ei(x: f64) -> f64 {
    if x > 0.0 {
        EULER_GAMMA + x.ln() + tanh_sinh(|t| t.exp_m1() / t, 0.0, x)
    } else {
        let s = -x;
        -exp_sinh(|u| (-s * (1.0 + u)).exp() / (1.0 + u), 0.0)
    }
}

pub fn oracle_2f1(a: f64, x: f64) -> f64 {
    a * tanh_sinh(|t| t.powf(a - 1.0) / (1.0 + x * t), 0.0, 1.0)
}

fn ln_gamma(x: f64) -> f64 {
    // Lanczos, g = 7.
    const C: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        return (PI / (PI * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut s = C[0];
    for (i, c) in C.iter().enumerate().skip(1) {
        s += c / (x + i as f64);
    }
    let t = x + 7.5;
    0.5 * (2.0 * PI).ln() + (x + 0.5) * t.ln() - t + s.ln()
}

/// Appell F1 from its Euler integral.
pub fn oracle_f1_integral(a: f64, b1: f64, b2: f64, c: f64, x: f64, y: f64) -> f64 {
    let pre = (ln_gamma(c) - ln_gamma(a) - ln_gamma(c - a)).exp();
    pre * tanh_sinh(
        |t| t.powf(a - 1.0) * (1.0 - t).powf(c - a - 1.0) * (1.0 - x * t).powf(-b1) * (1.0 - y * t).powf(-b2),
        0.0,
        1.0,
    )
}

/// Appell F1 from its double power series, `|x|, |y| < 1`.
pub fn oracle_f1_series(a: f64, b1: f64, b2: f64, c: f64, x: f64, y: f64) -> f64 {
    // Σ_m (a)_m (b1)_m / ((c)_m m!) x^m · ₂F₁(a + m, b2; c + m; y).
    let inner = |m: f64| {
        let mut term = 1.0;
        let mut sum = 1.0;
        for n in 0..5000 {
            let n = n as f64;
            term *= (a + m + n) * (b2 + n) / ((c + m + n) * (n + 1.0)) * y;
            sum += term;
            if term.abs() < 1e-17 * sum.abs() {
                break;
            }
        }
        sum
    };
    let mut coef = 1.0;
    let mut total = inner(0.0);
    for m in 0..5000 {
        let mf = m as f64;
        coef *= (a + mf) * (b1 + mf) / ((c + mf) * (mf + 1.0)) * x;
        let t = coef * inner(mf + 1.0);
        total += t;
        if coef.abs() < 1e-18 * total.abs() && t.abs() < 1e-17 * total.abs() {
            break;
        }
    }
    total
}

/// `∫₀^∞ ₂F₁(1, a; a+1; −c y)/(1 + y) dy` by nested quadrature, split at the
/// scale `1/c` where the hypergeometric factor starts to decay.
pub fn oracle_rate_kernel(a: f64, c: f64) -> f64 {
    let f = |y: f64| oracle_2f1(a, c * y) / (1.0 + y);
    let knee = 1.0 / c;
    tanh_sinh(f, 0.0, knee) + exp_sinh(f, knee)
}

/// Worst relative error of `ours` against `oracle` over the given points.
fn worst(points: &[Vec<f64>], ours: impl Fn(&[f64]) -> f64, oracle: impl Fn(&[f64]) -> f64) -> (f64, Vec<f64>) {
    let mut worst = (0.0, Vec::new());
    for p in points {
        let (o, v) = (oracle(p), ours(p));
        let rel = (v - o).abs() / o.abs().max(f64::MIN_POSITIVE);
        if !(rel <= worst.0) {
            worst = (rel, p.clone());
        }
    }
    worst
}

fn draw(rng: &mut ChaCha8Rng, n: usize, ranges: &[(f64, f64)]) -> Vec<Vec<f64>> {
    (0..n).map(|_| ranges.iter().map(|&(lo, hi)| rng.random_range(lo..hi)).collect()).collect()
}

fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    (rng.random_range(lo.ln()..hi.ln())).exp()
}

/// One line of the oracle report.
#[derive(Debug, Clone)]
pub struct OracleCheck {
    pub name: &'static str,
    pub points: usize,
    pub worst_rel: f64,
    pub worst_at: Vec<f64>,
}

impl OracleCheck {
    pub fn passed(&self, tol: f64) -> bool {
        self.worst_rel <= tol
    }
}

/// Compares every special function against its oracle on `n` random points
/// per function.
pub fn random_point_suite(n: usize, seed: u64) -> Vec<OracleCheck> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    let mut push = |name, pts: Vec<Vec<f64>>, ours: &dyn Fn(&[f64]) -> f64, oracle: &dyn Fn(&[f64]) -> f64| {
        let (worst_rel, worst_at) = worst(&pts, ours, oracle);
        out.push(OracleCheck { name, points: pts.len(), worst_rel, worst_at });
    };

    let pts = draw(&mut rng, n, &[(-5.0, 10.0)]);
    push("erfc", pts, &|p| erfc(p[0]), &|p| oracle_erfc(p[0]));

    let pts = draw(&mut rng, n, &[(0.0, 10.0)]);
    push("erfcx", pts, &|p| erfcx(p[0]), &|p| oracle_erfc(p[0]) * (p[0] * p[0]).exp());

    let pts = draw(&mut rng, n, &[(0.0, 20.0)]);
    push("parabolic_d_m1", pts, &|p| parabolic_d_m1(p[0]), &|p| oracle_d_m1(p[0]));

    let pts: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let mag = log_uniform(&mut rng, 1e-6, 60.0);
            vec![if i % 2 == 0 { mag } else { -mag }]
        })
        .collect();
    push("exp_integral_ei", pts, &|p| exp_integral_ei(p[0]).unwrap(), &|p| oracle_ei(p[0]));

    let pts: Vec<Vec<f64>> =
        (0..n).map(|_| vec![log_uniform(&mut rng, 0.2, 20.0), log_uniform(&mut rng, 1e-4, 1e6)]).collect();
    push("gauss_2f1_unit", pts, &|p| gauss_2f1_unit(p[0], p[1]).unwrap().value, &|p| oracle_2f1(p[0], p[1]));

    // Inside the unit polydisk the double series is an oracle independent of
    // any integral representation.
    let pts: Vec<Vec<f64>> = (0..n)
        .map(|_| {
            let a = rng.random_range(0.3..4.0);
            let c = a + rng.random_range(0.3..3.0);
            vec![
                a,
                rng.random_range(-2.0..4.0),
                rng.random_range(-2.0..4.0),
                c,
                rng.random_range(-0.8..0.8),
                rng.random_range(-0.8..0.8),
            ]
        })
        .collect();
    push("appell_f1 (series domain)", pts, &|p| appell_f1(p[0], p[1], p[2], p[3], p[4], p[5]).unwrap().value, &|p| {
        oracle_f1_series(p[0], p[1], p[2], p[3], p[4], p[5])
    });

    // The argument pattern produced by the α = 2 uplink series: a = b1 = b2
    // = k + 1, c = k + 2, with x ∈ (0, 1) and y possibly far below −1.
    let pts: Vec<Vec<f64>> = (0..n)
        .map(|_| {
            let k = rng.random_range(0..12) as f64;
            vec![k + 1.0, k + 1.0, k + 1.0, k + 2.0, rng.random_range(0.0..0.95), -log_uniform(&mut rng, 1e-3, 1e3)]
        })
        .collect();
    push("appell_f1 (uplink pattern)", pts, &|p| appell_f1(p[0], p[1], p[2], p[3], p[4], p[5]).unwrap().value, &|p| {
        oracle_f1_integral(p[0], p[1], p[2], p[3], p[4], p[5])
    });

    let pts: Vec<Vec<f64>> =
        (0..n).map(|_| vec![log_uniform(&mut rng, 0.3, 8.0), log_uniform(&mut rng, 1e-2, 1e3)]).collect();
    push("rate_kernel_g", pts, &|p| rate_kernel_g(p[0], p[1]).unwrap().value, &|p| oracle_rate_kernel(p[0], p[1]));

    // ∫₀^b e^{−kt} cos(wt) dt has a closed form.
    let pts = draw(&mut rng, n, &[(0.1, 20.0), (0.0, 5.0), (0.0, 30.0)]);
    push(
        "quad_adaptive",
        pts,
        &|p| quad_adaptive(|t| (-p[1] * t).exp() * (p[2] * t).cos(), 0.0, p[0], 1e-10).unwrap().value,
        &|p| {
            let (b, k, w) = (p[0], p[1], p[2]);
            let e = (-k * b).exp();
            (k - e * (k * (w * b).cos() - w * (w * b).sin())) / (k * k + w * w).max(f64::MIN_POSITIVE)
                + if k == 0.0 && w == 0.0 { b } else { 0.0 }
        },
    );

    let pts = draw(&mut rng, n, &[(0.0, 5.0)]);
    push(
        "alternating_series_sum",
        pts,
        &|p| {
            let x = p[0];
            let mut term = 1.0;
            alternating_series_sum(
                |k| {
                    if k > 0 {
                        term *= -x / k as f64;
                    }
                    term
                },
                1e-15,
                200,
            )
            .unwrap()
            .value
        },
        &|p| (-p[0]).exp(),
    );
    out
}

/// The closed-form checks: `ln 2`, `π²/6` and `sqrt(π/2)`.
pub fn closed_form_checks() -> Vec<(&'static str, f64, f64)> {
    vec![
        ("2F1(1,1;2;-1) = ln 2", gauss_2f1_unit(1.0, 1.0).unwrap().value, std::f64::consts::LN_2),
        ("G(1, 1) = pi^2/6", rate_kernel_g(1.0, 1.0).unwrap().value, PI * PI / 6.0),
        ("D_-1(0) = sqrt(pi/2)", parabolic_d_m1(0.0), FRAC_PI_2.sqrt()),
    ]
}
