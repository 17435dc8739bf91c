//! Spectral core: grids, transforms, multiplier calculus, dealiased
//! products, quadrature, and norms.

mod fft;
mod grid;
mod scalar;

pub use grid::Grid;
pub use scalar::{l2_inner, multiply, Axis, ScalarField, DEALIAS_PADDING};
