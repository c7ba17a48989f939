//! The two-dimensional periodic Lorentz gas in the Boltzmann–Grad limit.
//!
//! * [`billiard`]: exact microscopic dynamics among periodic or Poisson disks.
//! * [`kernel`]: the limiting transition kernel `Φ₀` and free-path laws.
//! * [`flight`]: the limiting memory-two random flight process.
//! * [`lattice_space`]: Haar-random lattices and cylinder hitting.
//! * [`stats`]: ECDFs and the hypothesis tests that tie these together.
//! * [`experiments`]: configured runs with reproducible outputs.

// Validation is written as `!(x > 0.0)` so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod billiard;
pub mod error;
pub mod experiments;
pub mod flight;
pub mod geometry;
pub mod kernel;
pub mod lattice_space;
pub mod parallel;
pub mod path;
pub mod quad;
pub mod stats;

pub use error::{Error, Result};
