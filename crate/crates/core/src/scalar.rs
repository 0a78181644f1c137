//! Scalar abstraction shared by every numeric routine in the crate.
//!
//! Everything is written against [`Scalar`], so the same code runs in `f32`,
//! `f64`, or double-double ([`twofloat::TwoFloat`]) precision.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, NumCast};

pub trait Scalar: Float + FloatConst + FromPrimitive + Debug + Display + Default + Send + Sync + 'static {
    /// Conversion of an `f64` literal. Goes through `NumCast`, since the
    /// `FromPrimitive::from_f64` of `TwoFloat` drops the fractional part.
    #[inline]
    fn lit(x: f64) -> Self {
        <Self as NumCast>::from(x).expect("literal not representable")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        <Self as NumCast>::from(n).expect("integer not representable")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        num_traits::ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }

    fn sum_iter<I: Iterator<Item = Self>>(it: I) -> Self {
        it.fold(Self::zero(), |acc, v| acc + v)
    }
}

impl<T> Scalar for T where T: Float + FloatConst + FromPrimitive + Debug + Display + Default + Send + Sync + 'static {}

/// Sum helper for iterators over scalars that do not implement `Sum`.
pub(crate) fn sum<T: Scalar>(it: impl Iterator<Item = T>) -> T {
    T::sum_iter(it)
}
