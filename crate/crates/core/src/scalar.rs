//! Scalar abstractions.
//!
//! [`Scalar`] is the minimal field-like interface needed to hold costs and to
//! run the analytic allocation oracle; it is implemented for `f32`, `f64` and
//! [`BigRational`] so the oracle can be evaluated exactly. [`Real`] adds the
//! floating point operations used by the quadrature path.

use std::fmt::Debug;

use num_rational::BigRational;
use num_traits::{Float, FloatConst, FromPrimitive, Num, ToPrimitive};

pub trait Scalar:
    Clone + Debug + PartialOrd + Num + FromPrimitive + ToPrimitive + Send + Sync + 'static
{
    /// `false` for NaN and infinities.
    fn is_finite_scalar(&self) -> bool;

    fn is_positive_finite(&self) -> bool {
        self.is_finite_scalar() && *self > Self::zero()
    }
}

impl Scalar for f32 {
    fn is_finite_scalar(&self) -> bool {
        self.is_finite()
    }
}

impl Scalar for f64 {
    fn is_finite_scalar(&self) -> bool {
        self.is_finite()
    }
}

impl Scalar for BigRational {
    fn is_finite_scalar(&self) -> bool {
        true
    }
}

/// Floating point scalar for the quadrature-based mechanism.
pub trait Real: Scalar + Float + FloatConst {
    /// Largest `|sum(p) - 1|` still attributed to rounding.
    fn sum_tolerance() -> Self;
    /// Deviations of `sum(p)` from one below this are left as computed.
    fn renormalize_threshold() -> Self;
    /// Slack allowed on `p` outside `[0, 1]` before clamping.
    fn range_slack() -> Self;
    /// Absolute tolerance when comparing expected costs of a deviation.
    fn deviation_tolerance() -> Self;

    fn lit(v: f64) -> Self {
        <Self as FromPrimitive>::from_f64(v).expect("literal representable")
    }
}

impl Real for f64 {
    fn sum_tolerance() -> Self {
        1e-9
    }
    fn renormalize_threshold() -> Self {
        1e-12
    }
    fn range_slack() -> Self {
        1e-12
    }
    fn deviation_tolerance() -> Self {
        1e-9
    }
}

impl Real for f32 {
    fn sum_tolerance() -> Self {
        1e-4
    }
    fn renormalize_threshold() -> Self {
        1e-6
    }
    fn range_slack() -> Self {
        1e-6
    }
    fn deviation_tolerance() -> Self {
        1e-5
    }
}
