//! Floating-point scalar abstraction used by the log-space numerics.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};
use serde::Serialize;

/// Floating point scalar: `f32` or `f64`.
///
/// Exact counting is always done with big integers; this type only carries
/// log-space evaluations, bound values and sample statistics.
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Default + Serialize + Send + Sync + 'static
{
    /// Lossy conversion from an integer count.
    fn from_count(v: u64) -> Self {
        <Self as FromPrimitive>::from_u64(v).expect("every u64 is representable as a float")
    }

    /// Lossy conversion from an `f64` constant.
    fn lit(v: f64) -> Self {
        <Self as FromPrimitive>::from_f64(v).expect("finite f64 literal")
    }
}

impl Real for f32 {}
impl Real for f64 {}
