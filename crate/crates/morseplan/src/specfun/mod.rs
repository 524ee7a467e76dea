//! Special functions used by the spectral solver.
//!
//! Everything here is a pure function of its arguments. The ₂F₂ series is
//! summed in double-double arithmetic because the terms grow far larger than
//! the result for large Laguerre orders.

mod dd;
mod gamma;
mod hyp;
mod laguerre;

pub use dd::DoubleDouble;
pub use gamma::{log_gamma, upper_incomplete_gamma};
pub use hyp::{hyp2f2, hyp2f2_dd, Hyp2f2Options};
pub use laguerre::{laguerre_scaled, laguerre_sequence, LaguerreSequence, ScaledLaguerre};
