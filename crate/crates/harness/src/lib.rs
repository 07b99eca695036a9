//! Experiment harness for the streaming submodular maximization library:
//! dataset loading, stream replay, run and sweep reports, the invariant
//! verification battery, and brute-force optima.

pub mod config;
pub mod dataset;
pub mod error;
pub mod report;
pub mod runner;
pub mod sweep;
pub mod verify;

pub use config::{parse_grid, Algorithm, RunConfig};
pub use error::{HarnessError, Result};
pub use report::RunReport;
pub use runner::{optimum, run, run_on, Optimum, RunOutcome};
