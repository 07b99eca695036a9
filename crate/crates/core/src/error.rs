use thiserror::Error;

use crate::oracle::ElementId;

/// Errors raised by oracles, extensions and algorithms on invalid input.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("element {id} is out of range for a ground set of size {n}")]
    OutOfRange { id: ElementId, n: usize },

    #[error("duplicate element {0} in set")]
    DuplicateElement(ElementId),

    #[error("negative weight {0}")]
    NegativeWeight(f64),

    #[error(
        "exact enumeration over {found} fractional coordinates exceeds the cap of {cap}; \
         use sampled mode instead"
    )]
    ExactCapExceeded { found: usize, cap: usize },

    #[error("exhaustive submodularity check needs n <= {cap}, got n = {n}; use sampled mode")]
    ExhaustiveCapExceeded { n: usize, cap: usize },

    #[error("brute force over {universe} elements with k = {k} enumerates {count} subsets, over the cap of {cap}")]
    BruteForceCap {
        universe: usize,
        k: usize,
        count: u128,
        cap: u128,
    },

    #[error("coordinate {value} of element {id} is outside [0, 1]")]
    CoordinateOutOfRange { id: ElementId, value: f64 },

    #[error("fractional point has l1 norm {norm}, which exceeds the capacity {k}")]
    MassExceedsCapacity { norm: f64, k: usize },

    #[error("ground set size mismatch: expected {expected}, got {found}")]
    SizeMismatch { expected: usize, found: usize },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
