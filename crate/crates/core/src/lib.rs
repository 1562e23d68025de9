//! Variable-exponent total variation.
//!
//! Pointwise kernels of the variable Lebesgue modular `ρ_p`, exponent-map
//! construction from images, desk-scale fan-beam tomography, and
//! first-order primal–dual solvers for TV, TVᵖ, Tikhonov and TGV²
//! regularized reconstruction.
//!
//! Numeric types are generic over [`Real`] (`f32`/`f64`); the aliases at the
//! crate root fix `f64`, which is what the experiments use.

// `!(x > 0)` style guards are kept: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bench;
pub mod diffops;
pub mod error;
pub mod experiment;
pub mod exponent;
pub mod grid;
pub mod io;
pub mod kernels;
pub mod metrics;
pub mod noise;
pub mod phantom;
pub mod scalar;
pub mod solvers;
pub mod tomo;

pub use error::{Error, Result};
pub use grid::{CellField, GridSpec};
pub use scalar::{Extended, Real};

pub type ScalarField = grid::ScalarField<f64>;
pub type VectorField = grid::VectorField<f64>;
pub type TensorField = grid::TensorField<f64>;
pub type ExponentMap = kernels::ExponentMap<f64>;
pub type NewtonConfig = kernels::NewtonConfig<f64>;
pub type Sinogram = tomo::Sinogram<f64>;
