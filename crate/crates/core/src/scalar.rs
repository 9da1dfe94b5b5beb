use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::str::FromStr;

use num_traits::{Float, FloatConst, FromPrimitive};

/// Real scalar used throughout the crate.
///
/// Implemented for `f32` and `f64`. `Display`/`FromStr` are required so that
/// potentials and reports round-trip through their text formats exactly.
pub trait Real:
    Float + FloatConst + FromPrimitive + Sum + Send + Sync + Debug + Display + FromStr + Default + 'static
{
    /// Converts an `f64` constant into `Self`.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("constant representable in scalar type")
    }

    #[inline]
    fn from_index(n: i64) -> Self {
        Self::from_i64(n).expect("index representable in scalar type")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}
