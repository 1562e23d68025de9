//! Desk-scale 2-D divergent-beam tomography: forward ray transform, its
//! exact discrete adjoint, and filtered back-projection.

mod fbp;
mod geometry;
mod matrix;
mod project;

pub use fbp::{fbp, FbpConfig, FbpFilter};
pub use geometry::{FanBeamGeometry, Sinogram};
pub use matrix::SystemMatrix;
pub use project::{adjoint, forward};
