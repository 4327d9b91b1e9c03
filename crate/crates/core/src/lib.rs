//! Monte Carlo simulation and verification of the stochastic wave equation
//!
//! ```text
//! ∂²u/∂t² = ∂²u/∂x² + σ(u) L̇(t,x) + b(u),   u(0,·) = v0,  ∂u/∂t(0,·) = v1
//! ```
//!
//! on ℝ₊ × ℝ, driven by a Lévy white noise `L` built from a compensated
//! Poisson random measure with jump intensity `dt dx ν(dz)`.
//!
//! The crate is `no_std` (it needs `alloc`). Everything here is a pure
//! function of its inputs and an explicit random stream; parallel replicate
//! execution and file formats live in the `levywave` companion crate.
//!
//! Module map:
//! - [`levy_measure`]: jump measures ν, their moments and tail functionals,
//!   and conditional jump sampling.
//! - [`prm`]: Poisson point sampling, truncated compensated noise increments
//!   on a grid, and stochastic integrals of step integrands.
//! - [`fields`]: the cone kernel, homogeneous solution and coefficients.
//! - [`solver`]: cone-sum and diamond lattice schemes plus Picard iteration.
//! - [`moments`]: replicated moment estimation, weighted norms, growth fits.
//! - [`oracle_bounds`]: renewal-equation solver, closed-form second moment,
//!   explicit moment envelopes and the Rosenthal maximal-inequality probe.
#![no_std]
#![deny(unsafe_code)]
// `!(x > 0.0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod error;
pub mod fields;
pub mod levy_measure;
pub mod moments;
pub mod oracle_bounds;
pub mod prm;
pub mod quadrature;
pub mod rng;
pub mod solver;
pub mod step;

pub use error::{Error, Result};
