//! Pseudo-spectral solver for the incompressible second-grade fluid
//! equations on the periodic torus, with monitors for the energy estimates
//! and a harness for the vanishing-α limit.

pub mod cli;
pub mod diagnostics;
pub mod dynamics;
pub mod error;
pub mod fields;
pub mod harness;
pub mod spectral;

pub use error::{Error, Result};
