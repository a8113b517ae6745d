//! Convection of a fluid layer with anisotropic viscosity and heat diffusion,
//! periodic in `x` and bounded by horizontal plates at `z = 0` and `z = 1`.
//!
//! The crate covers the full chain from physical inputs to observed dynamics:
//!
//! - [`params`]: dimensionless groups, Rayleigh number and regime classification;
//! - [`spectrum`]: dispersion relation, eigenpairs, critical point and a dense
//!   Galerkin cross-check;
//! - [`manifold`]: center-manifold reduction, amplitude equations, ring radius,
//!   bifurcated states, stream function and cell counting;
//! - [`dns`]: a Fourier (cosine | sine) solver for the full nonlinear system;
//! - [`harness`]: reproducible experiments comparing the reduced theory with
//!   direct simulation.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dns;
pub mod error;
pub mod field;
pub mod harness;
pub mod manifold;
pub mod params;
pub mod quadrature;
pub mod spectrum;

pub use error::{Error, Result};
pub use field::SparseField;
pub use params::{DimensionlessParams, PhysicalParams};
