//! Scalar abstraction shared by the numeric modules.
//!
//! Everything that does arithmetic on samples, coordinates or weights is
//! written against [`Real`], so the same code serves the 64-bit analysis
//! path and the 32-bit fixed-footprint inference path.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssignOps, ToPrimitive};

/// Floating point type usable throughout the crate.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssignOps
    + Sum
    + Default
    + Debug
    + Display
    + Send
    + Sync
    + rustfft::FftNum
    + 'static
{
    /// Machine epsilon as a plain constant.
    const EPS: Self;

    /// Converts an `f64` literal. Total for the supported types.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    /// Converts a count.
    #[inline]
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {
    const EPS: Self = f32::EPSILON;
}

impl Real for f64 {
    const EPS: Self = f64::EPSILON;
}

/// Mean of a slice; zero for an empty slice.
pub fn mean<T: Real>(xs: &[T]) -> T {
    if xs.is_empty() {
        return T::zero();
    }
    xs.iter().copied().sum::<T>() / T::from_count(xs.len())
}

/// Population variance.
pub fn variance<T: Real>(xs: &[T]) -> T {
    if xs.is_empty() {
        return T::zero();
    }
    let m = mean(xs);
    xs.iter().map(|&x| (x - m) * (x - m)).sum::<T>() / T::from_count(xs.len())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn moments_agree_across_precisions() {
        let xs = [1.0f64, 2.0, 3.0, 4.0];
        let ys: Vec<f32> = xs.iter().map(|&x| x as f32).collect();
        assert_eq!(mean(&xs), 2.5);
        assert_eq!(mean(&ys), 2.5f32);
        assert!((variance(&xs) - 1.25).abs() < 1e-15);
        assert!((variance(&ys) - 1.25).abs() < 1e-6);
        assert_eq!(mean::<f64>(&[]), 0.0);
    }
}
