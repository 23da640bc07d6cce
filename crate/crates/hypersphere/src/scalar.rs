//! Scalar abstraction: every numerical routine in this crate is generic over
//! [`Real`], a floating-point type with the usual transcendental operations.
//!
//! `f64` is the working precision of the shipped tools; `f32` is supported
//! for experimentation (tolerances that are meaningful at double precision
//! are widened to machine epsilon where needed).

use std::fmt;
use std::iter::Sum;
use std::ops::{AddAssign, DivAssign, MulAssign, SubAssign};

use num_traits::{Float, FloatConst, FromPrimitive};

pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Sum<Self>
    + Default
    + fmt::Debug
    + fmt::Display
    + fmt::LowerExp
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal into `Self`, rounding if necessary.
    fn of(value: f64) -> Self {
        Self::from_f64(value).expect("literal not representable in scalar type")
    }

    /// Converts a count or index into `Self`.
    fn of_usize(value: usize) -> Self {
        Self::from_usize(value).unwrap_or_else(|| Self::of(value as f64))
    }

    /// Lossy view as `f64`, used when emitting reports and file formats.
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}
