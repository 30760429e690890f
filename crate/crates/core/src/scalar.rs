//! Scalar abstraction over the floating-point element type.

use num_traits::{Float, FromPrimitive, ToPrimitive};
use serde::{de::DeserializeOwned, Serialize};
use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::{AddAssign, DivAssign, MulAssign, SubAssign};

/// Element type of every matrix, vector and parameter in this crate.
///
/// Implemented for `f32` and `f64` through the blanket impl below; all
/// tolerances written as `f64` literals are converted with [`cst`].
pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Sum
    + Serialize
    + DeserializeOwned
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
}

impl<T> Scalar for T where
    T: Float
        + FromPrimitive
        + ToPrimitive
        + AddAssign
        + SubAssign
        + MulAssign
        + DivAssign
        + Sum
        + Serialize
        + DeserializeOwned
        + Debug
        + Display
        + Send
        + Sync
        + 'static
{
}

/// Converts an `f64` constant into the scalar type.
#[inline]
pub fn cst<F: Scalar>(v: f64) -> F {
    F::from_f64(v).expect("constant representable in scalar type")
}

/// Converts a `usize` count into the scalar type.
#[inline]
pub fn count<F: Scalar>(v: usize) -> F {
    F::from_usize(v).expect("count representable in scalar type")
}
