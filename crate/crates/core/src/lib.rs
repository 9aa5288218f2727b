//! Density-based topology optimization of 2D elastic structures on regular
//! grids of unit-square bilinear elements.
//!
//! Two optimizers minimize compliance under a volume constraint:
//! [`simp`] with continuous densities and the optimality-criteria update, and
//! [`beso`] with discrete solid/void densities ranked by sensitivity numbers.
//! Both use the distance-weighted neighborhood filter in [`filter`] to keep
//! designs free of checkerboard patterns, which [`diagnostics`] measures.
//!
//! Numerical code is generic over [`Scalar`] (`f32`, `f64`); the aliases at
//! the crate root fix the scalar to `f64`.

// `!(x > 0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod beso;
pub mod density;
pub mod diagnostics;
mod error;
pub mod filter;
pub mod grid_fem;
pub mod record;
pub mod runner;
mod scalar;
pub mod simp;

pub use density::DensityField;
pub use error::{Result, TopOptError};
pub use grid_fem::GridMesh;
pub use record::{IterationRow, OptOutcome, OptRecord, RunError};
pub use scalar::Scalar;

pub type ElastParamsF64 = grid_fem::ElastParams<f64>;
pub type LoadCaseF64 = grid_fem::LoadCase<f64>;
pub type DisplacementFieldF64 = grid_fem::DisplacementField<f64>;
pub type DensityFieldF64 = DensityField<f64>;
pub type FilterKernelF64 = filter::FilterKernel<f64>;
pub type SimpConfigF64 = simp::SimpConfig<f64>;
pub type BesoConfigF64 = beso::BesoConfig<f64>;
pub type OptRecordF64 = OptRecord<f64>;

pub type ElastParamsF32 = grid_fem::ElastParams<f32>;
pub type LoadCaseF32 = grid_fem::LoadCase<f32>;
pub type DensityFieldF32 = DensityField<f32>;
pub type FilterKernelF32 = filter::FilterKernel<f32>;
pub type SimpConfigF32 = simp::SimpConfig<f32>;
pub type BesoConfigF32 = beso::BesoConfig<f32>;
