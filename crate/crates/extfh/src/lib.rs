//! Barycentric rational interpolation on equispaced grids: the usual
//! Floater-Hormann family, its extended variant built from extrapolated
//! boundary values, and the stability diagnostics that go with them
//! (Lebesgue functions and constants, backward-instability certificates,
//! and configurable-precision error experiments).

pub mod error;
pub mod extended;
pub mod fh;
pub mod grid;
pub mod lebesgue;
pub mod stability;

pub use error::Error;
pub use grid::{EquispacedGrid, ExtendedGrid};
