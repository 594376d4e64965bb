use std::f64::consts::{FRAC_2_SQRT_PI, PI, SQRT_2};

/// Complementary error function.
pub fn erfc(x: f64) -> f64 {
    libm::erfc(x)
}

/// Scaled complementary error function `e^{x²} erfc(x)`.
pub fn erfcx(x: f64) -> f64 {
    if x < 26.0 {
        return (x * x).exp() * libm::erfc(x);
    }
    // Asymptotic expansion; at x >= 26 eight terms are far below f64 resolution.
    let inv2x2 = 1.0 / (2.0 * x * x);
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..=8 {
        term *= -((2 * k - 1) as f64) * inv2x2;
        sum += term;
    }
    sum * FRAC_2_SQRT_PI / (2.0 * x)
}

/// Parabolic cylinder function of order −1, for `x >= 0`.
///
/// `D₋₁(x) = e^{x²/4} √(π/2) erfc(x/√2)`, evaluated through `erfcx` so it
/// neither overflows nor underflows for large `x`.
pub fn parabolic_d_m1(x: f64) -> f64 {
    (PI / 2.0).sqrt() * (-0.25 * x * x).exp() * erfcx(x / SQRT_2)
}
