//! Scalar abstraction shared by the closed-form statistics, quadrature and
//! signal-model code.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Euler–Mascheroni constant to 20 significant digits.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Real floating-point scalar: `f32` or `f64`.
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Sum + Debug + Display + Send + Sync + 'static
{
    /// Lossy conversion from an `f64` literal.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    fn from_count(n: u64) -> Self {
        Self::from_u64(n).expect("count representable in scalar type")
    }

    fn euler_gamma() -> Self {
        Self::lit(EULER_GAMMA)
    }

    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Power ratio to decibels.
pub fn to_db<T: Real>(ratio: T) -> T {
    T::lit(10.0) * ratio.log10()
}

/// Decibels to power ratio.
pub fn from_db<T: Real>(db: T) -> T {
    T::lit(10.0).powf(db / T::lit(10.0))
}
