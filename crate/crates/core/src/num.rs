//! Scalar abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Floating point scalar the model, QUBO, annealers and statevector are generic over.
///
/// Implemented for `f32` and `f64`. The crate root re-exports `f64` aliases for
/// the common types.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + Default
    + Debug
    + Display
    + Send
    + Sync
    + Serialize
    + DeserializeOwned
    + 'static
{
    /// Lossy conversion from `f64`; all literals in the crate go through here.
    fn lit(v: f64) -> Self;

    fn from_usize_lossy(v: usize) -> Self {
        Self::lit(v as f64)
    }

    fn to_f64_lossy(self) -> f64;
}

macro_rules! impl_real {
    ($t:ty) => {
        impl Real for $t {
            #[inline]
            fn lit(v: f64) -> Self {
                v as $t
            }

            #[inline]
            fn to_f64_lossy(self) -> f64 {
                self as f64
            }
        }
    };
}

impl_real!(f32);
impl_real!(f64);

/// Largest value in an iterator, or `None` when empty. NaNs are ignored.
pub(crate) fn max_of<T: Real>(it: impl IntoIterator<Item = T>) -> Option<T> {
    it.into_iter().fold(None, |acc, v| match acc {
        None if !v.is_nan() => Some(v),
        Some(a) if v > a => Some(v),
        other => other,
    })
}
