use std::fmt::{Debug, Display, LowerExp};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Floating-point scalar used throughout the crate: `f32` or `f64`.
///
/// Tolerances that are not given explicitly are derived from
/// [`Float::epsilon`], so the same code runs in single precision with
/// correspondingly looser accuracy.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Default
    + Debug
    + Display
    + LowerExp
    + Send
    + Sync
    + Serialize
    + DeserializeOwned
    + std::iter::Sum
    + 'static
{
    /// Converts an `f64` literal.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("count representable")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// `4π`, the Poisson coupling with G = 1.
    #[inline]
    fn four_pi() -> Self {
        Self::lit(4.0) * Self::PI()
    }

    /// Relative tolerance a few hundred ulps above machine precision.
    #[inline]
    fn tight_tol() -> Self {
        Self::epsilon() * Self::lit(256.0)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Clamps negative values to zero, `(x)_+`.
#[inline]
pub fn positive_part<T: Real>(x: T) -> T {
    if x > T::zero() {
        x
    } else {
        T::zero()
    }
}
