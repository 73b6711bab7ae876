//! Scalar abstraction shared by the numeric modules.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Floating point scalar: `f32` or `f64`.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Default
    + Send
    + Sync
    + Debug
    + Display
    + Serialize
    + DeserializeOwned
    + 'static
{
    /// Converts an `f64` literal, panicking only if the type cannot hold it.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl<T> Real for T where
    T: Float
        + FloatConst
        + FromPrimitive
        + ToPrimitive
        + Default
        + Send
        + Sync
        + Debug
        + Display
        + Serialize
        + DeserializeOwned
        + 'static
{
}

pub(crate) fn norm3<T: Real>(a: &[T; 3]) -> T {
    (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt()
}

pub(crate) fn dist3<T: Real>(a: &[T; 3], b: &[T; 3]) -> T {
    norm3(&[a[0] - b[0], a[1] - b[1], a[2] - b[2]])
}

/// Wraps an angle into `[0, 2π)`.
pub(crate) fn wrap_angle<T: Real>(x: T) -> T {
    let period = T::TAU();
    let mut y = x % period;
    if y < T::zero() {
        y = y + period;
    }
    if y >= period {
        y = y - period;
    }
    y
}

/// Signed difference `b - a` of two angles, folded into `[-π, π)`.
pub(crate) fn angle_delta<T: Real>(a: T, b: T) -> T {
    let d = wrap_angle(b - a);
    if d >= T::PI() {
        d - T::TAU()
    } else {
        d
    }
}
