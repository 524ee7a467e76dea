//! Command-line tool, HTTP service and surface archive format for the
//! morseplan engine.

pub mod api;
pub mod archive;
pub mod cli;
pub mod error;
pub mod http;

pub use error::ServiceError;
