//! Scalar abstraction: every numeric routine in this crate is generic over
//! [`Real`], with `f32` and `f64` as the provided instances. The crate root
//! re-exports `f64` aliases for the common case.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// Floating-point scalar used throughout the crate.
pub trait Real:
    'static
    + Send
    + Sync
    + Float
    + FloatConst
    + NumAssign
    + FromPrimitive
    + ToPrimitive
    + Debug
    + Display
{
}

impl Real for f32 {}
impl Real for f64 {}

/// Lifts an `f64` constant into the scalar type.
///
/// Conversion from `f64` cannot fail for the provided instances; the panic
/// guards exotic future scalars only.
#[inline]
pub(crate) fn real<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("f64 constant must be representable in the scalar type")
}

/// Lossy view of a scalar as `f64`, for error payloads and reporting.
#[inline]
pub(crate) fn approx_f64<T: Real>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// `a * ln(b)` under the convention `0 * ln(0) = 0`.
///
/// Log-likelihoods with boundary parameters (an all-success Bernoulli cell,
/// an empty category) are defined through this convention, equivalently
/// `0^0 = 1`.
#[inline]
pub(crate) fn xlny<T: Real>(a: T, b: T) -> T {
    if a == T::zero() {
        T::zero()
    } else {
        a * b.ln()
    }
}
