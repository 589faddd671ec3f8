//! Scalar abstraction: the physics in this crate is generic over [`Real`],
//! implemented for `f32` and `f64`.

use std::fmt;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};
use rustfft::FftNum;

/// Floating-point scalar usable throughout the simulator: `f32` or `f64`.
pub trait Real:
    Float + FloatConst + FromPrimitive + NumAssign + FftNum + fmt::Display + fmt::LowerExp
{
}

impl Real for f32 {}
impl Real for f64 {}

/// Convert an `f64` constant into the working scalar type.
#[inline]
pub fn r64<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("finite constant")
}

/// Lossy view of a scalar as `f64`, for diagnostics and error messages.
#[inline]
pub fn as_f64<T: Real>(x: T) -> f64 {
    num_traits::ToPrimitive::to_f64(&x).unwrap_or(f64::NAN)
}
