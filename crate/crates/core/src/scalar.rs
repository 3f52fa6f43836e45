//! Floating point abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// A binary floating point type usable by the pool math: `f32` or `f64`.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts an `f64` literal into `Self`, rounding to nearest.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("finite literal is representable")
    }

    #[inline]
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count is representable")
    }

    /// Lossy widening for diagnostics and error payloads.
    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Tolerance for invariant comparisons that must absorb rounding of
    /// closed-form exp/log evaluations.
    #[inline]
    fn invariant_rtol() -> Self {
        Self::epsilon() * Self::lit(4096.0)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// `min(max(x, lo), hi)`.
#[inline]
pub fn clip<F: Scalar>(x: F, lo: F, hi: F) -> F {
    x.max(lo).min(hi)
}
