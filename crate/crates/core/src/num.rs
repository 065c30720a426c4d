//! Scalar abstraction for the solver core.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive};

/// Floating-point scalar the whole crate is generic over (`f32` or `f64`).
pub trait Real:
    Float + FloatConst + FromPrimitive + Sum + Debug + Display + Send + Sync + 'static
{
    /// Converts an `f64` constant into the working scalar.
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("finite f64 constant")
    }

    /// Converts back to `f64`, e.g. for special functions evaluated in
    /// double precision.
    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar fits in f64")
    }
}

impl<T> Real for T where
    T: Float + FloatConst + FromPrimitive + Sum + Debug + Display + Send + Sync + 'static
{
}
