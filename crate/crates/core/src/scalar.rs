//! Scalar abstraction for the numerical core.
//!
//! Everything downstream (models, solvers, simulators) is generic over
//! [`Real`], which is implemented for `f64` and `f32`. `f64` is the working
//! precision; `f32` exists for cheap exploratory sweeps and is not expected
//! to meet the tight tolerances of the solver test suite.

use std::fmt;

use num_traits::{Float, FromPrimitive, NumCast};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal, StandardUniform};

/// Floating-point scalar used by the solvers and simulators.
pub trait Real:
    Float + FromPrimitive + NumCast + fmt::Debug + fmt::Display + fmt::LowerExp + Send + Sync + 'static
{
    /// Cast from any primitive number. Panics on an unrepresentable cast,
    /// which for the constants used in this crate cannot happen.
    fn cast<U: NumCast>(u: U) -> Self {
        NumCast::from(u).expect("numeric cast")
    }

    /// Standard normal draw.
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self;

    /// Uniform draw on the open interval (0, 1).
    fn uniform_open<R: Rng + ?Sized>(rng: &mut R) -> Self;

    fn half() -> Self {
        Self::cast(0.5)
    }

    fn two() -> Self {
        Self::cast(2.0)
    }

    /// Shorthand for `self.to_f64()` used when handing values to error
    /// messages and serialized reports.
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

macro_rules! impl_real {
    ($t:ty) => {
        impl Real for $t {
            fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
                StandardNormal.sample(rng)
            }

            fn uniform_open<R: Rng + ?Sized>(rng: &mut R) -> Self {
                loop {
                    let u: $t = StandardUniform.sample(rng);
                    if u > 0.0 {
                        return u;
                    }
                }
            }
        }
    };
}

impl_real!(f64);
impl_real!(f32);
