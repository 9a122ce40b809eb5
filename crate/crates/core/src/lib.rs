//! Certified constants and numerical checks for decay-of-correlations, CLT,
//! large-deviation and strong-law bounds on expanding systems with a
//! renewal structure: arbitrary-precision constants, a renewal chain, a
//! finite-memory shift laboratory, and hyperbolic toral automorphisms.

pub mod error;
pub mod precision;

pub use error::{Error, Result};
pub mod constants;
pub mod bounds;
pub mod optimize;
pub mod renewal;
pub mod shift;
pub mod toral;
pub mod report;
pub mod commands;
