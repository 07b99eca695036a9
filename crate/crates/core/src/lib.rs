//! Single-pass streaming algorithms for maximizing a non-negative, possibly
//! non-monotone, submodular function subject to a cardinality constraint.
//!
//! The crate is organised bottom-up:
//!
//! * [`oracle`]: value oracles with call counting and the objective families
//!   used for experiments (coverage, cut, modular, and a hard instance).
//! * [`extensions`]: multilinear and Lovász extensions.
//! * [`rounding`]: swap rounding and deterministic pipage rounding for the
//!   cardinality polytope.
//! * [`offline`]: offline post-processors (brute force, random greedy, greedy).
//! * [`threshold`]: the threshold algorithm with `p` disjoint solutions, both
//!   with a known estimate of the optimum and with a geometric guess ladder.
//! * [`extension_stream`]: the fractional variant driven by the multilinear
//!   extension.
//! * [`randomized`]: the repeated random-partition variant and its
//!   post-processing, plus [`randomized::analysis`] estimators.

pub mod error;
pub mod extension_stream;
pub mod extensions;
pub mod offline;
pub mod oracle;
pub mod randomized;
pub mod rounding;
pub mod stream;
pub mod threshold;

pub use error::{Error, Result};
pub use oracle::{ElementId, Oracle, SetFunction};
pub use stream::{bounded, mix_seed, run_stream, StreamOutput, StreamProcessor, StreamStats, TraceEvent, Violation};

/// Absolute tolerance for comparisons between real values produced by
/// objectives (sums of input weights).
pub const TOLERANCE: f64 = 1e-9;
