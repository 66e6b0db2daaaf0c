//! Verification harness for the primitive-equations solver: configuration,
//! I/O, diagnostics analysis, manufactured solutions and the criterion suites.

pub mod analysis;
pub mod cli;
pub mod config;
pub mod error;
pub mod experiments;
pub mod io;
pub mod manufactured;
pub mod suites;
pub mod tolerances;

pub use error::{HarnessError, Result};
