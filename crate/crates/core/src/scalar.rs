//! Scalar abstraction shared by every numeric routine in the workspace.
//!
//! Everything that does arithmetic on signals or spherical-harmonic
//! coefficients is written against [`Real`], so the same code runs in `f32`
//! (fast training and rendering) and `f64` (reference computations and
//! gradient checks).

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// Floating point scalar: `f32` or `f64`.
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + NumAssign + Sum + Default + Debug + Display + rustfft::FftNum + Send + Sync + 'static
{
    /// Lossy conversion from `f64`, used for literals and table values.
    #[inline]
    fn lit(x: f64) -> Self {
        <Self as FromPrimitive>::from_f64(x).expect("f64 is representable")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }

    #[inline]
    fn from_len(n: usize) -> Self {
        Self::lit(n as f64)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Shorthand for [`Real::lit`].
#[inline]
pub fn lit<T: Real>(x: f64) -> T {
    T::lit(x)
}

/// Sum with pairwise reduction so results do not depend on how a caller
/// chunks the input.
pub fn pairwise_sum<T: Real>(xs: &[T]) -> T {
    const LEAF: usize = 64;
    if xs.len() <= LEAF {
        let mut acc = T::zero();
        for &x in xs {
            acc += x;
        }
        acc
    } else {
        let mid = xs.len() / 2;
        pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
    }
}

/// Dot product accumulated in `f64` regardless of `T`.
pub fn dot_f64<T: Real>(a: &[T], b: &[T]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(&x, &y)| x.to_f64_lossy() * y.to_f64_lossy()).sum()
}

/// Squared Euclidean norm accumulated in `f64`.
pub fn energy<T: Real>(a: &[T]) -> f64 {
    dot_f64(a, a)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairwise_matches_naive_on_small_input() {
        let xs: Vec<f64> = (0..1000).map(|i| i as f64 * 0.5).collect();
        let naive: f64 = xs.iter().sum();
        assert_eq!(pairwise_sum(&xs), naive);
    }

    #[test]
    fn lit_roundtrips() {
        assert_eq!(lit::<f32>(0.25), 0.25f32);
        assert_eq!(<f64 as Real>::from_len(7), 7.0);
    }
}
