//! Adaptive multiresolution solvers for one-dimensional conservation laws,
//! parabolic equations and strongly degenerate convection-diffusion problems.
//!
//! The crate is organized around a dyadic grid hierarchy ([`grid`]), exact
//! multiresolution transforms for point values and cell averages
//! ([`transform`]), two adaptive storage layouts — a sparse point
//! representation with safety points ([`sparse`]) and a graded dynamic tree
//! with virtual leaves ([`tree`]) — a catalog of model problems ([`models`]),
//! high-resolution spatial discretizations ([`schemes`]), TVD Runge-Kutta
//! time loops ([`evolution`]) and run diagnostics ([`metrics`]).
//!
//! All numerics are generic over the scalar type through the [`Real`] trait;
//! `f64` is the precision used by the test suite and the CLI.

pub mod error;
pub mod evolution;
pub mod grid;
pub mod metrics;
pub mod models;
pub mod num;
pub mod schemes;
pub mod sparse;
pub mod transform;
pub mod tree;

pub use error::{Error, Result};
pub use num::Real;

/// Double-precision aliases for the main domain types.
pub type Hierarchy64 = grid::GridHierarchy<f64>;
pub type Coefficients64 = transform::InterpCoefficients<f64>;
pub type Representation64 = transform::MrRepresentation<f64>;
pub type Model64 = models::ModelProblem<f64>;
pub type Scheme64 = schemes::SchemeConfig<f64>;
pub type Metrics64 = metrics::RunMetrics<f64>;
