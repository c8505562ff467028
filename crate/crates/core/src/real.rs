//! Generic scalar type for all field coefficients.

use num_traits::{Float, FloatConst, FromPrimitive};
use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;
use std::ops::{AddAssign, DivAssign, MulAssign, SubAssign};

/// Floating-point coefficient type, implemented for `f32` and `f64`.
///
/// Everything in this crate is generic over `Real`; the concrete aliases at
/// the crate root (`CubicalComplex64`, `FormField64`, ...) pin `f64`, which is
/// what the verification tolerances in the test suite assume.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Sum
    + Debug
    + Display
    + LowerExp
    + Default
    + Send
    + Sync
    + 'static
{
    /// Lossless (for f64) conversion used by snapshot I/O and reports.
    fn to_f64(self) -> f64;
    fn from_f64_lossy(x: f64) -> Self;
    fn from_usize_lossy(x: usize) -> Self;

    fn half() -> Self {
        Self::from_f64_lossy(0.5)
    }
    fn two() -> Self {
        Self::from_f64_lossy(2.0)
    }
}

impl Real for f32 {
    fn to_f64(self) -> f64 {
        self as f64
    }
    fn from_f64_lossy(x: f64) -> Self {
        x as f32
    }
    fn from_usize_lossy(x: usize) -> Self {
        x as f32
    }
}

impl Real for f64 {
    fn to_f64(self) -> f64 {
        self
    }
    fn from_f64_lossy(x: f64) -> Self {
        x
    }
    fn from_usize_lossy(x: usize) -> Self {
        x as f64
    }
}
