use crate::{Error, Result};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_860_6;

/// Exponential integral `Ei(x)` (Cauchy principal value for `x > 0`).
pub fn exp_integral_ei(x: f64) -> Result<f64> {
    check(x)?;
    if x > 0.0 && x <= 40.0 || x < 0.0 && x >= -1.0 {
        return Ok(power_series(x));
    }
    if x > 40.0 {
        return Ok(x.exp() * asymptotic_scaled(x));
    }
    Ok(-(x.exp()) * e1_continued_fraction(-x))
}

/// `e^{-x} Ei(x)`, finite for every nonzero `x`.
pub fn exp_integral_ei_scaled(x: f64) -> Result<f64> {
    check(x)?;
    if x > 40.0 {
        return Ok(asymptotic_scaled(x));
    }
    if x < -1.0 {
        return Ok(-e1_continued_fraction(-x));
    }
    Ok((-x).exp() * power_series(x))
}

fn check(x: f64) -> Result<()> {
    if x == 0.0 || x.is_nan() {
        return Err(Error::domain(format!("Ei is singular at {x}")));
    }
    Ok(())
}

/// `γ + ln|x| + Σ_{k≥1} x^k / (k·k!)`.
fn power_series(x: f64) -> f64 {
    let mut term = 1.0;
    let mut sum = 0.0;
    for k in 1..500 {
        let kf = k as f64;
        term *= x / kf;
        let add = term / kf;
        sum += add;
        if add.abs() <= f64::EPSILON * sum.abs() {
            break;
        }
    }
    EULER_GAMMA + x.abs().ln() + sum
}

/// `e^{-x} Ei(x) ~ (1/x) Σ k!/x^k`, truncated at the smallest term.
fn asymptotic_scaled(x: f64) -> f64 {
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..100 {
        let next = term * k as f64 / x;
        if next.abs() >= term.abs() {
            break;
        }
        term = next;
        sum += term;
        if term <= f64::EPSILON * sum {
            break;
        }
    }
    sum / x
}

/// `e^{x} E₁(x)` for `x > 1` by the modified Lentz continued fraction.
fn e1_continued_fraction(x: f64) -> f64 {
    let tiny = 1e-300;
    let mut b = x + 1.0;
    let mut c = 1.0 / tiny;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..1000 {
        let an = -((i * i) as f64);
        b += 2.0;
        d = 1.0 / (an * d + b);
        c = b + an / c;
        let delta = c * d;
        h *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    h
}
