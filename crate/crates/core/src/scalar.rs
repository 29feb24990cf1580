//! Scalar abstraction shared by the network weights, the metrics and k-means.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Real scalar type used for bottom-up weights, activations and scores.
///
/// Implemented for `f32` and `f64`; everything in this crate that produces a
/// real number is generic over it.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + Sum + Debug + Display + Default + Send + Sync + 'static
{
    /// Lossless-enough conversion from a count.
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable as float")
    }

    /// Conversion from an `f64` literal or parameter.
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("f64 representable in scalar")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
