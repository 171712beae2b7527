use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst};

use crate::special;

/// Real scalar the analytic models are written against (`f32` or `f64`).
///
/// Special functions are evaluated in `f64` and rounded back.
pub trait Scalar: Float + FloatConst + Debug + Display + Default + Send + Sync + 'static {
    /// Converts an `f64` literal.
    fn c(val: f64) -> Self;

    fn to_f64(self) -> f64;

    /// Complementary error function.
    fn erfc(self) -> Self {
        Self::c(special::erfc(self.to_f64()))
    }

    /// `ln erfc(x)`, finite far beyond the underflow point of `erfc`.
    fn ln_erfc(self) -> Self {
        Self::c(special::ln_erfc(self.to_f64()))
    }
}

impl Scalar for f64 {
    #[inline]
    fn c(val: f64) -> Self {
        val
    }

    #[inline]
    fn to_f64(self) -> f64 {
        self
    }
}

impl Scalar for f32 {
    #[inline]
    fn c(val: f64) -> Self {
        val as f32
    }

    #[inline]
    fn to_f64(self) -> f64 {
        self as f64
    }
}
