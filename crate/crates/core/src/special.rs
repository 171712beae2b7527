//! Error-function helpers.

use std::f64::consts::PI;

/// Above this argument `erfc` is evaluated through the scaled continued
/// fraction instead of directly.
const DIRECT_LIMIT: f64 = 5.0;

pub fn erfc(x: f64) -> f64 {
    libm::erfc(x)
}

/// Scaled complementary error function `e^{x²} erfc(x)` for `x ≥ 5`,
/// by the Laplace continued fraction evaluated bottom-up.
fn erfcx_large(x: f64) -> f64 {
    let mut tail = 0.0;
    for k in (1..=60).rev() {
        tail = (k as f64 / 2.0) / (x + tail);
    }
    1.0 / (PI.sqrt() * (x + tail))
}

/// `ln erfc(x)`.
pub fn ln_erfc(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x <= DIRECT_LIMIT {
        erfc(x).ln()
    } else if x.is_infinite() {
        f64::NEG_INFINITY
    } else {
        -x * x + erfcx_large(x).ln()
    }
}

/// `ln(½ erfc(x))`, the log of a Gaussian tail probability `Q(x√2)`.
pub fn ln_half_erfc(x: f64) -> f64 {
    ln_erfc(x) - std::f64::consts::LN_2
}
