//! Scalar abstraction shared by every numerical routine in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// Floating point types the library is generic over (`f32`, `f64`).
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + Default
    + Debug
    + Display
    + Send
    + Sync
    + std::str::FromStr
    + 'static
{
    /// Tolerance used when checking that masses sum to one.
    fn mass_tolerance() -> Self;
}

impl Real for f64 {
    fn mass_tolerance() -> Self {
        1e-12
    }
}

impl Real for f32 {
    fn mass_tolerance() -> Self {
        // 1e-12 is below f32 resolution.
        1e-5
    }
}

/// Converts an `f64` literal into `S`.
#[inline]
pub fn lit<S: Real>(v: f64) -> S {
    S::from_f64(v).expect("f64 literal representable in scalar type")
}

/// Converts a count into `S`.
#[inline]
pub fn count<S: Real>(n: usize) -> S {
    S::from_usize(n).expect("count representable in scalar type")
}

/// Lossy conversion to `f64`, used for reporting and I/O.
#[inline]
pub fn to_f64<S: Real>(v: S) -> f64 {
    v.to_f64().unwrap_or(f64::NAN)
}

/// `2π`.
#[inline]
pub fn two_pi<S: Real>() -> S {
    S::TAU()
}

/// `(2π)^{-d/2}`, the modulus of every basis function `e_k`.
#[inline]
pub fn basis_modulus<S: Real>(dim: usize) -> S {
    two_pi::<S>().powf(-count::<S>(dim) / lit(2.0))
}
