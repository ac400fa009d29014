//! The floating-point abstraction every module is generic over.

use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Floating point: `f32` or `f64`.
pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + Debug
    + Display
    + Default
    + Serialize
    + DeserializeOwned
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal into this type, rounding if necessary.
    #[inline]
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    /// Lossless widening for serialization and reporting.
    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar widens to f64")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
