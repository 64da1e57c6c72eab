//! Scalar abstraction for the numerical kernels.

use num_traits::{Float, FromPrimitive, ToPrimitive};
use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

/// Floating-point scalar all kernels are generic over.
///
/// `f32` and `f64` satisfy the bound; the benchmark tolerances assume `f64`.
pub trait Real:
    Float + FromPrimitive + ToPrimitive + Sum + Debug + Display + LowerExp + Send + Sync + 'static
{
    /// Lossless-enough conversion from an `f64` literal or parameter.
    #[inline]
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("scalar conversion from f64")
    }

    /// Conversion to `f64` for serialization and reporting.
    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().expect("scalar conversion to f64")
    }
}

impl<T> Real for T where
    T: Float
        + FromPrimitive
        + ToPrimitive
        + Sum
        + Debug
        + Display
        + LowerExp
        + Send
        + Sync
        + 'static
{
}

/// Shorthand for `T::of(x)`, used for numeric literals in generic code.
#[inline]
pub fn real<T: Real>(x: f64) -> T {
    T::of(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn converts_both_ways() {
        let x: f32 = real(0.5);
        assert_eq!(x, 0.5f32);
        let y: f64 = real(1e-12);
        assert_eq!(y.to_f64_lossy(), 1e-12);
    }
}
