//! Scalar abstraction shared by every kernel and algorithm in the crate.

use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

/// Real floating-point scalar: `f32` or `f64`.
///
/// Tolerances are per type. The `f64` values are the fixed constants used
/// throughout the test-suite; the `f32` values are loosened in proportion to
/// the machine epsilon.
pub trait Real:
    Float + NumAssign + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Maximum entry deviation of `BᵀB` from the identity for an orthonormal basis.
    const ORTHO_TOL: f64;
    /// Slack on the unit-ball action constraint.
    const ACTION_TOL: f64;
    /// Norms below this are treated as zero (e.g. by the unit-ball argmax).
    const TINY: f64;

    /// Draw one standard Gaussian variate.
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self;

    /// Lossy conversion from an `f64` literal.
    #[inline]
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn of_usize(n: usize) -> Self {
        Self::from_usize(n).expect("usize representable")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("finite scalar")
    }
}

impl Real for f64 {
    const ORTHO_TOL: f64 = 1e-8;
    const ACTION_TOL: f64 = 1e-9;
    const TINY: f64 = 1e-12;

    #[inline]
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        StandardNormal.sample(rng)
    }
}

impl Real for f32 {
    const ORTHO_TOL: f64 = 1e-4;
    const ACTION_TOL: f64 = 1e-5;
    const TINY: f64 = 1e-6;

    #[inline]
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        StandardNormal.sample(rng)
    }
}
