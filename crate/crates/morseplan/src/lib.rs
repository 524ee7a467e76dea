//! Goal-based planning engine built on a Morse-potential spectral solver
//! for the backward Kolmogorov equation.
//!
//! The tail probability `P[Π_T < Π̂]` for a contribution policy
//! `u_t = u₀e^{ξt}` is expanded in a Laguerre-based basis in the Morse
//! variable `y = 2u₀e^{ξt}/(σ²Π_t)`. The [`surface`] module tabulates it over
//! the control plane and extracts constant-probability frontiers, and
//! [`mc_oracle`] provides an independent Monte Carlo check.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod diagnostics;
pub mod error;
pub mod mc_oracle;
pub mod model;
pub mod spectral;
pub mod specfun;
pub mod surface;

pub use error::{Error, Result};

/// Version string embedded in archives and service responses.
pub const ENGINE_VERSION: &str = env!("CARGO_PKG_VERSION");
