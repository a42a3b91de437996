//! IO companion for the Lipschitz approximation toolkit: field file formats
//! (CSV for 1D, JSON for masked 2D), result serialization, named builtin
//! data, and the command-line front end.

pub mod builtins;
pub mod cli;
pub mod io;

pub use lipfit_core as core;
