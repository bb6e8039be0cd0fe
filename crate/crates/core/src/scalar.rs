//! Scalar traits.
//!
//! Every numeric routine in the crate is written against [`Real`], which is
//! implemented for `f32` and `f64`. Expression evaluation is additionally
//! generic over [`Scalar`], which also covers the forward-mode [`Jet`] type.
//!
//! [`Jet`]: crate::jet::Jet

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Sub, SubAssign};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating point scalar: `f32` or `f64`.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Debug
    + Display
    + Default
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Sum
    + Send
    + Sync
    + 'static
{
}

impl Real for f32 {}
impl Real for f64 {}

/// Converts an `f64` literal into `T`.
#[inline]
pub fn lit<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("literal representable in scalar type")
}

/// Converts a `T` into `f64`.
#[inline]
pub fn to_f64<T: Real>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Arithmetic needed by the expression evaluator.
pub trait Scalar:
    Clone
    + Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    type Base: Real;

    fn constant(c: Self::Base) -> Self;
    /// Zeroth-order (plain) value.
    fn value(&self) -> Self::Base;

    fn sin(&self) -> Self;
    fn cos(&self) -> Self;
    fn exp(&self) -> Self;
    fn ln(&self) -> Self;
    fn sqrt(&self) -> Self;
    fn atan2(&self, x: &Self) -> Self;
    fn powi(&self, n: i32) -> Self;
    fn powf(&self, p: Self::Base) -> Self;
}

impl<T: Real> Scalar for T {
    type Base = T;

    #[inline]
    fn constant(c: T) -> Self {
        c
    }
    #[inline]
    fn value(&self) -> T {
        *self
    }
    #[inline]
    fn sin(&self) -> Self {
        Float::sin(*self)
    }
    #[inline]
    fn cos(&self) -> Self {
        Float::cos(*self)
    }
    #[inline]
    fn exp(&self) -> Self {
        Float::exp(*self)
    }
    #[inline]
    fn ln(&self) -> Self {
        Float::ln(*self)
    }
    #[inline]
    fn sqrt(&self) -> Self {
        Float::sqrt(*self)
    }
    #[inline]
    fn atan2(&self, x: &Self) -> Self {
        Float::atan2(*self, *x)
    }
    #[inline]
    fn powi(&self, n: i32) -> Self {
        Float::powi(*self, n)
    }
    #[inline]
    fn powf(&self, p: T) -> Self {
        Float::powf(*self, p)
    }
}
