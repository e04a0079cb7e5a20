//! Floating-point abstraction for the simulation core.

use num_traits::{FromPrimitive, ToPrimitive};
use rand::Rng;
use rand_distr::StandardNormal;

/// Real scalar the physics code is generic over.
///
/// `nalgebra::RealField` supplies the transcendental functions and ordering;
/// the extra methods cover literal conversion and Gaussian sampling, the two
/// places where `f32` and `f64` would otherwise need separate code paths.
pub trait Scalar:
    nalgebra::RealField + Copy + FromPrimitive + ToPrimitive + Send + Sync
{
    /// Converts a literal. Panics only if the target type cannot represent
    /// any finite value of the source, which cannot happen for f32/f64.
    fn of(x: f64) -> Self;

    /// Widens to `f64` for reporting and statistics.
    fn as_f64(self) -> f64;

    /// Draws one standard normal variate.
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self;
}

impl Scalar for f64 {
    #[inline]
    fn of(x: f64) -> Self {
        x
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self
    }

    #[inline]
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        rng.sample(StandardNormal)
    }
}

impl Scalar for f32 {
    #[inline]
    fn of(x: f64) -> Self {
        x as f32
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self as f64
    }

    #[inline]
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        rng.sample(StandardNormal)
    }
}
