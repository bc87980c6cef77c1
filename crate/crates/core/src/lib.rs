//! Quantization of a free particle on the (D−1)-sphere.
//!
//! The crate reduces the constrained problem to an intrinsic chart, builds
//! the Laplace-Beltrami Hamiltonian in a cartesian and an angular chart,
//! diagonalizes it on spectral grids, integrates the classical flow both
//! ways, checks the constrained bracket algebra, and measures the spurious
//! potential produced by naive polar time slicing of the path integral.

// `!(a < b)` comparisons are written to reject NaN as well
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod dynamics;
pub mod error;
pub mod expr;
pub mod families;
pub mod geometry;
pub mod operators;
pub mod pathintegral;
pub mod quadrature;
pub mod spectra;
pub mod suites;

pub use error::{Result, RotorError};
pub use geometry::{Chart, ChartPoint, ModelParams};
