//! The hypergeometric patterns the analytic evaluators need, each computed
//! from an Euler-type integral representation.

use super::quad::{integrate_breaks, QuadOptions};
use super::SeriesEval;
use crate::{Error, Result};

/// Tight tolerances: these values feed alternating series whose terms cancel.
/// Every integrand here is positive, so a purely relative target is safe and
/// keeps tiny values (large-order Appell terms) accurate.
const KERNEL_OPTS: QuadOptions = QuadOptions { abs_tol: 1e-300, rel_tol: 1e-13, max_subdivisions: 4000 };

/// `₂F₁(1, a; a+1; −x)` for `a > 0`, `x >= 0`.
///
/// Uses `a ∫₀¹ t^{a−1} / (1 + x t) dt`; for `a < 1` the substitution
/// `t = u^{1/a}` removes the endpoint singularity, leaving
/// `∫₀¹ du / (1 + x u^{1/a})`.
pub fn gauss_2f1_unit(a: f64, x: f64) -> Result<SeriesEval> {
    if !(a > 0.0) || !a.is_finite() || !(x >= 0.0) || !x.is_finite() {
        return Err(Error::domain(format!("2F1(1,a;a+1;-x) needs a > 0 and x >= 0, got a={a}, x={x}")));
    }
    if x == 0.0 {
        return Ok(SeriesEval::exact(1.0, super::EvalPath::Integral));
    }
    if a >= 1.0 {
        // Knee of 1/(1 + x t) sits at t = 1/x.
        let knee = (1.0 / x).min(1.0);
        let f = |t: f64| a * t.powf(a - 1.0) / (1.0 + x * t);
        return integrate_breaks(f, &breaks(knee), KERNEL_OPTS);
    }
    let inv_a = 1.0 / a;
    let knee = x.powf(-a).min(1.0);
    integrate_breaks(|u: f64| 1.0 / (1.0 + x * u.powf(inv_a)), &breaks(knee), KERNEL_OPTS)
}

/// Appell `F₁(a; b₁, b₂; c; x, y)` for `c > a > 0`, `x < 1`, `y < 1`, from
///
/// `Γ(c)/(Γ(a)Γ(c−a)) ∫₀¹ t^{a−1}(1−t)^{c−a−1}(1−xt)^{−b₁}(1−yt)^{−b₂} dt`.
pub fn appell_f1(a: f64, b1: f64, b2: f64, c: f64, x: f64, y: f64) -> Result<SeriesEval> {
    let finite = [a, b1, b2, c, x, y].iter().all(|v| v.is_finite());
    if !finite || !(a > 0.0) || !(c > a) {
        return Err(Error::domain(format!("Appell F1 needs c > a > 0, got a={a}, c={c}")));
    }
    if !(x < 1.0) || !(y < 1.0) {
        return Err(Error::domain(format!("Appell F1 Euler integral needs x < 1 and y < 1, got x={x}, y={y}")));
    }
    if x == 0.0 && y == 0.0 {
        return Ok(SeriesEval::exact(1.0, super::EvalPath::Integral));
    }
    let e = c - a;
    let prefactor = if e == 1.0 { a } else { (libm::lgamma(c) - libm::lgamma(a) - libm::lgamma(e)).exp() };
    let tail = |t: f64| (1.0 - x * t).powf(-b1) * (1.0 - y * t).powf(-b2);

    // Features of the tail factors sit near t = 1/|x| and t = 1/|y|.
    let mut knees = vec![0.0, 0.5, 1.0];
    for v in [x, y] {
        if v.abs() > 2.0 {
            knees.push(1.0 / v.abs());
        }
    }
    knees.sort_by(f64::total_cmp);
    knees.dedup();

    let mut total = SeriesEval::exact(0.0, super::EvalPath::Integral);
    for w in knees.windows(2) {
        let piece = euler_piece(w[0], w[1], a, e, &tail)?;
        total.value += piece.value;
        total.err_estimate += piece.err_estimate;
        total.effort += piece.effort;
    }
    Ok(total.affine(prefactor, 0.0))
}

/// `∫_lo^hi t^{a−1}(1−t)^{e−1} tail(t) dt` on a piece of `[0, 1]`, removing
/// a singular power at whichever endpoint the piece touches.
fn euler_piece<F: Fn(f64) -> f64>(lo: f64, hi: f64, a: f64, e: f64, tail: &F) -> Result<SeriesEval> {
    if lo == 0.0 && a < 1.0 {
        // s = t^a: t^{a−1} dt = ds / a.
        let inv_a = 1.0 / a;
        let f = |s: f64| {
            let t = s.powf(inv_a);
            (1.0 - t).powf(e - 1.0) * tail(t) * inv_a
        };
        return integrate_breaks(f, &[0.0, hi.powf(a)], KERNEL_OPTS);
    }
    if hi == 1.0 && e < 1.0 {
        // s = (1 − t)^e: (1−t)^{e−1} dt = −ds / e.
        let inv_e = 1.0 / e;
        let f = |s: f64| {
            let t = 1.0 - s.powf(inv_e);
            t.powf(a - 1.0) * tail(t) * inv_e
        };
        return integrate_breaks(f, &[0.0, (1.0 - lo).powf(e)], KERNEL_OPTS);
    }
    let f = |t: f64| t.powf(a - 1.0) * (1.0 - t).powf(e - 1.0) * tail(t);
    integrate_breaks(f, &[lo, hi], KERNEL_OPTS)
}

/// `∫₀^∞ ₂F₁(1, a; a+1; −c y) / (1 + y) dy` for `a > 0`, `c > 0`.
///
/// Substituting the Euler integral of the ₂F₁ and integrating over `y`
/// first gives `∫₀¹ L(c u^{1/a}) du` with `L(m) = ln m / (m − 1)`.
pub fn rate_kernel_g(a: f64, c: f64) -> Result<SeriesEval> {
    if !(a > 0.0) || !a.is_finite() || !(c > 0.0) || !c.is_finite() {
        return Err(Error::domain(format!("rate kernel needs a > 0 and c > 0, got a={a}, c={c}")));
    }
    let inv_a = 1.0 / a;
    let f = |u: f64| log_ratio(c * u.powf(inv_a));
    // L changes character where c u^{1/a} crosses 1.
    let knee = c.powf(-a).min(1.0);
    integrate_breaks(f, &breaks(knee), KERNEL_OPTS)
}

/// `ln m / (m − 1)`, continuous at `m = 1`.
fn log_ratio(m: f64) -> f64 {
    let d = m - 1.0;
    if d.abs() < 1e-8 {
        1.0 - 0.5 * d + d * d / 3.0
    } else if d.abs() < 0.5 {
        d.ln_1p() / d
    } else {
        m.ln() / d
    }
}

fn breaks(knee: f64) -> Vec<f64> {
    if knee > 0.0 && knee < 1.0 {
        vec![0.0, knee, 1.0]
    } else {
        vec![0.0, 1.0]
    }
}
