//! Floating-point scalar abstraction: every numerical routine in this crate
//! is generic over [`Scalar`], implemented for `f32` and `f64`.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal, StandardUniform};

/// Real scalar type for all numerical kernels.
///
/// Extends [`num_traits::Float`] with conversions from literals and the two
/// random draws the samplers need, so generic code never has to thread
/// distribution bounds around.
pub trait Scalar:
    num_traits::Float
    + num_traits::FromPrimitive
    + num_traits::ToPrimitive
    + num_traits::NumAssign
    + std::iter::Sum
    + std::fmt::Debug
    + std::fmt::Display
    + std::fmt::LowerExp
    + Default
    + Send
    + Sync
    + 'static
{
    /// Draw from N(0, 1).
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self;

    /// Draw from U[0, 1).
    fn unit_uniform<R: Rng + ?Sized>(rng: &mut R) -> Self;

    /// Lossy conversion from an `f64` constant.
    #[inline]
    fn cast(x: f64) -> Self {
        <Self as num_traits::FromPrimitive>::from_f64(x)
            .expect("f64 constant not representable in this scalar type")
    }

    /// Conversion from a count.
    #[inline]
    fn cast_usize(n: usize) -> Self {
        <Self as num_traits::FromPrimitive>::from_usize(n)
            .expect("usize not representable in this scalar type")
    }

    /// Lossy conversion to `f64`, for diagnostics and serialization.
    #[inline]
    fn to_f64_lossy(self) -> f64 {
        <Self as num_traits::ToPrimitive>::to_f64(&self).unwrap_or(f64::NAN)
    }
}

impl Scalar for f64 {
    #[inline]
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        StandardNormal.sample(rng)
    }

    #[inline]
    fn unit_uniform<R: Rng + ?Sized>(rng: &mut R) -> Self {
        StandardUniform.sample(rng)
    }
}

impl Scalar for f32 {
    #[inline]
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        StandardNormal.sample(rng)
    }

    #[inline]
    fn unit_uniform<R: Rng + ?Sized>(rng: &mut R) -> Self {
        StandardUniform.sample(rng)
    }
}
