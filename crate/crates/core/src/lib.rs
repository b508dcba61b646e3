//! Numerical laboratory for a Bieberbach-type estimate on conformally
//! immersed discs in ℝⁿ.
//!
//! The crate is `no_std` (with `alloc`). Layers, bottom up:
//!
//! * [`jet`]: forward-mode second-order jets in two chart variables,
//!   nestable for third derivatives.
//! * [`surface`] and [`chart`]: parametrized patches and chart precompositions.
//! * [`geometry`]: frames, second fundamental form, Christoffel symbols,
//!   covariant derivative and Hessian.
//! * [`attractor`]: normalized attractors and their normal-frame extension.
//! * [`flow`]: adaptive integration of ambient flows with first and second
//!   variational equations.
//! * [`estimate`]: the estimate itself, its supporting identities and the
//!   classical coefficient bound.
#![no_std]

extern crate alloc;

pub mod attractor;
pub mod chart;
pub mod error;
pub mod estimate;
pub mod flow;
pub mod geometry;
pub mod jet;
pub mod linalg;
pub mod series;
pub mod surface;

pub use error::{Error, Result};
pub use jet::{complex_z_derivatives, lift_chart, Jet2, Jet2Scalar, Jet2Vector, Real};
pub use linalg::{ComplexVec, Vector};
pub use surface::{registry, SurfacePatch};
