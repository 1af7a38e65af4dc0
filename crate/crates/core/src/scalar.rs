//! Scalar abstraction for the numerical kernels.
//!
//! Everything in this crate is generic over [`Real`], a floating-point scalar
//! with the constants and conversions the solvers need. `f32` and `f64` both
//! implement it; the crate root exposes `f64` aliases, which is what the CLI
//! and the acceptance tolerances assume.

use std::fmt;
use std::iter::Sum;
use std::ops::{AddAssign, DivAssign, MulAssign, SubAssign};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Sum
    + fmt::Debug
    + fmt::Display
    + Send
    + Sync
    + 'static
{
    /// Lift an `f64` constant (tolerance, coefficient, literal) into `Self`.
    fn of(v: f64) -> Self {
        Self::from_f64(v).expect("finite f64 constant must convert")
    }

    /// Lift a count into `Self`; panics only if the count overflows the
    /// scalar's range, which no grid in this crate approaches.
    fn of_usize(n: usize) -> Self {
        Self::from_usize(n).expect("grid-sized count must convert")
    }

    /// Lossy view as `f64`, used for error reports and dense linear algebra.
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}
