//! Invariant idempotent probabilities of max-plus iterated function systems
//! on finite metric spaces.
//!
//! Everything is generic over the scalar type ([`Scalar`]: `f32` or `f64`);
//! the aliases below fix it to the common choices.

// `!(x >= 0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod examples;
pub mod fuzzy;
pub mod invariant;
pub mod mane;
pub mod maxplus;
pub mod measures;
pub mod mpifs;
pub mod scalar;
pub mod spaces;

pub use error::{Error, Result};
pub use fuzzy::FuzzySet;
pub use invariant::{BoundaryData, CodingMap};
pub use mane::PotentialMatrix;
pub use maxplus::{ClosureMethod, MaxPlus, MpMatrix, BOTTOM_TOKEN};
pub use measures::Density;
pub use mpifs::{MpIfs, SystemParts, SystemSpec, ValidationReport};
pub use scalar::Scalar;
pub use spaces::{FiniteSpace, IndexSpace, SpaceSpec};

pub type MaxPlusValue = MaxPlus<f64>;
pub type MpMatrixF64 = MpMatrix<f64>;
pub type SpaceF64 = FiniteSpace<f64>;
pub type DensityF64 = Density<f64>;
pub type MpIfsF64 = MpIfs<f64>;
pub type PotentialF64 = PotentialMatrix<f64>;
pub type FuzzySetF64 = FuzzySet<f64>;

pub type MaxPlusF32 = MaxPlus<f32>;
pub type MpMatrixF32 = MpMatrix<f32>;
pub type SpaceF32 = FiniteSpace<f32>;
pub type DensityF32 = Density<f32>;
pub type MpIfsF32 = MpIfs<f32>;
pub type PotentialF32 = PotentialMatrix<f32>;
pub type FuzzySetF32 = FuzzySet<f32>;
