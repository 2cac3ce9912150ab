//! Scalar abstraction: all field/jet/step kernels are generic over `Real`.

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};
use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

/// Floating-point scalar usable by every numerical kernel in this crate.
///
/// `rustfft::FftNum` brings the FFT machinery; the `num_traits` bounds give
/// elementary functions and conversions. Implemented for `f32` and `f64`.
pub trait Real:
    rustfft::FftNum
    + Float
    + FloatConst
    + FromPrimitive
    + NumAssign
    + Sum
    + Display
    + LowerExp
    + Debug
{
    /// Lossy conversion to `f64` (exact for `f32`/`f64`).
    fn to_f64(self) -> f64;
}

impl Real for f32 {
    fn to_f64(self) -> f64 {
        self as f64
    }
}

impl Real for f64 {
    fn to_f64(self) -> f64 {
        self
    }
}

/// Shorthand for converting an `f64` constant into the working scalar.
#[inline]
pub fn c<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("f64 constant must convert into the scalar type")
}

/// `2*pi` in the working scalar.
#[inline]
pub fn two_pi<T: Real>() -> T {
    T::PI() + T::PI()
}

/// Side length of the torus, `2*pi`.
#[inline]
pub fn torus_side<T: Real>() -> T {
    two_pi::<T>()
}

/// Volume of the torus, `(2*pi)^3`.
#[inline]
pub fn torus_volume<T: Real>() -> T {
    let s = torus_side::<T>();
    s * s * s
}
