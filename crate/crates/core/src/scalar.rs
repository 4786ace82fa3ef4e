//! Scalar abstraction: the whole crate is generic over the floating-point
//! type through [`Scalar`], implemented for `f32` and `f64`.

use nalgebra::RealField;
use num_traits::ToPrimitive;

/// Floating-point scalar the estimators operate on.
pub trait Scalar:
    RealField + ToPrimitive + Copy + Default + std::iter::Sum<Self> + std::fmt::Display
{
}

impl<T> Scalar for T where
    T: RealField + ToPrimitive + Copy + Default + std::iter::Sum<T> + std::fmt::Display
{
}

/// Lossless-for-f64, rounding-for-f32 conversion from `f64` literals.
#[inline]
pub fn c64<T: Scalar>(x: f64) -> T {
    nalgebra::convert(x)
}

/// Absolute value without the `Signed`/`ComplexField` method ambiguity.
#[inline]
pub fn abs<T: Scalar>(x: T) -> T {
    if x < T::zero() {
        -x
    } else {
        x
    }
}

/// Quiet NaN in the scalar type.
#[inline]
pub fn nan<T: Scalar>() -> T {
    c64(f64::NAN)
}

/// IEEE NaN test (`RealField` does not expose one).
#[inline]
pub fn is_nan<T: Scalar>(x: T) -> bool {
    x != x
}

/// Pairwise maximum.
#[inline]
pub fn fmax<T: Scalar>(a: T, b: T) -> T {
    if a > b {
        a
    } else {
        b
    }
}

/// Pairwise minimum.
#[inline]
pub fn fmin<T: Scalar>(a: T, b: T) -> T {
    if a < b {
        a
    } else {
        b
    }
}
