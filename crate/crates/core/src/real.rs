//! Scalar abstraction for the numeric kernels.
//!
//! Everything in this crate that does mathematics is generic over [`Real`],
//! which is `f32` or `f64` in practice. The concrete aliases at the crate
//! root fix `f64`, which is what the estimator pipelines and the CLI use.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::float::{Float, FloatConst};
use num_traits::{FromPrimitive, NumAssign};

/// Floating-point scalar: `f32` or `f64`.
///
/// The default tolerances shipped with [`crate::numerics::ToleranceConfig`]
/// assume `f64`; pass coarser ones when instantiating with `f32`.
pub trait Real:
    Float + FloatConst + FromPrimitive + NumAssign + Sum + Debug + Display + Send + Sync + 'static
{
    /// Converts an `f64` literal into the scalar type.
    fn lit(value: f64) -> Self {
        Self::from_f64(value).expect("literal not representable by the scalar type")
    }

    /// Converts a count into the scalar type.
    fn from_count(value: usize) -> Self {
        Self::from_usize(value).expect("count not representable by the scalar type")
    }
}

impl Real for f32 {}
impl Real for f64 {}
