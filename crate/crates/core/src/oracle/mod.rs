//! Value oracles for set functions over a finite ground set.
//!
//! An [`Oracle`] wraps a pure [`SetFunction`] and counts evaluations. Sets
//! cross the oracle boundary as id lists; they are normalised to sorted order
//! and duplicates are rejected rather than silently merged.

mod check;
mod families;
pub mod formats;

use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use crate::error::{Error, Result};

pub use check::{
    find_diminishing_returns_violation, find_submodularity_violation, verify_submodular,
    CheckMode, DiminishingReturnsViolation, SubmodularityViolation, EXHAUSTIVE_CAP,
};
pub use families::{
    make_coverage, make_cut, make_hard_instance, make_modular, make_random_coverage,
    make_random_cut, Contraction, Coverage, Cut, HardInstance, Modular, SquaredSize,
};

/// Index of an element in the ground set `{0, .., n-1}`.
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct ElementId(pub usize);

impl ElementId {
    #[inline]
    pub fn index(self) -> usize {
        self.0
    }
}

impl From<usize> for ElementId {
    fn from(i: usize) -> Self {
        ElementId(i)
    }
}

impl fmt::Display for ElementId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Shorthand for building id lists in tests and fixtures.
pub fn ids(raw: &[usize]) -> Vec<ElementId> {
    raw.iter().copied().map(ElementId).collect()
}

/// A pure, deterministic set function `f: 2^N -> R`.
///
/// Implementations receive sets that are sorted, duplicate-free and in range.
pub trait SetFunction: Send + Sync + fmt::Debug {
    fn ground_size(&self) -> usize;

    fn value(&self, set: &[ElementId]) -> f64;

    /// Short human-readable description, used in reports.
    fn describe(&self) -> String {
        format!("{self:?}")
    }
}

/// Call-counting wrapper around a [`SetFunction`].
///
/// Safe for concurrent read-only evaluation; the counter is atomic.
pub struct Oracle {
    func: Arc<dyn SetFunction>,
    calls: AtomicU64,
}

impl fmt::Debug for Oracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Oracle")
            .field("func", &self.func)
            .field("calls", &self.calls())
            .finish()
    }
}

impl Oracle {
    pub fn new<F: SetFunction + 'static>(func: F) -> Self {
        Self::from_arc(Arc::new(func))
    }

    pub fn from_arc(func: Arc<dyn SetFunction>) -> Self {
        Oracle {
            func,
            calls: AtomicU64::new(0),
        }
    }

    /// A fresh oracle over the same function, with its own zeroed counter.
    pub fn fresh(&self) -> Self {
        Self::from_arc(Arc::clone(&self.func))
    }

    pub fn function(&self) -> &dyn SetFunction {
        self.func.as_ref()
    }

    /// Ground-set size `n`.
    pub fn n(&self) -> usize {
        self.func.ground_size()
    }

    /// Number of successful [`evaluate`](Self::evaluate) invocations so far.
    pub fn calls(&self) -> u64 {
        self.calls.load(Ordering::Relaxed)
    }

    pub fn reset_calls(&self) {
        self.calls.store(0, Ordering::Relaxed);
    }

    /// `f(S)`. The set may be given in any order.
    pub fn evaluate(&self, set: &[ElementId]) -> Result<f64> {
        let n = self.n();
        let strictly_sorted = set.windows(2).all(|w| w[0] < w[1]);
        let value = if strictly_sorted {
            if let Some(&last) = set.last() {
                if last.0 >= n {
                    return Err(Error::OutOfRange { id: last, n });
                }
            }
            self.func.value(set)
        } else {
            let sorted = normalize(set, n)?;
            self.func.value(&sorted)
        };
        self.calls.fetch_add(1, Ordering::Relaxed);
        Ok(value)
    }

    /// `f(S ∪ {e})` without requiring the caller to build the union.
    pub fn evaluate_with(&self, set: &[ElementId], e: ElementId) -> Result<f64> {
        let mut union = Vec::with_capacity(set.len() + 1);
        union.extend_from_slice(set);
        union.push(e);
        self.evaluate(&union)
    }

    /// Marginal value `f(e | S) = f(S ∪ {e}) - f(S)`.
    ///
    /// Returns 0 without touching the oracle when `e ∈ S`; otherwise costs two
    /// evaluations.
    pub fn marginal(&self, e: ElementId, set: &[ElementId]) -> Result<f64> {
        let n = self.n();
        if e.0 >= n {
            return Err(Error::OutOfRange { id: e, n });
        }
        let sorted = normalize(set, n)?;
        if sorted.binary_search(&e).is_ok() {
            return Ok(0.0);
        }
        let base = self.evaluate(&sorted)?;
        let with = self.evaluate_with(&sorted, e)?;
        Ok(with - base)
    }
}

/// Sorts a set, rejecting out-of-range ids and duplicates.
pub fn normalize(set: &[ElementId], n: usize) -> Result<Vec<ElementId>> {
    let mut sorted = set.to_vec();
    sorted.sort_unstable();
    for w in sorted.windows(2) {
        if w[0] == w[1] {
            return Err(Error::DuplicateElement(w[0]));
        }
    }
    if let Some(&last) = sorted.last() {
        if last.0 >= n {
            return Err(Error::OutOfRange { id: last, n });
        }
    }
    Ok(sorted)
}

/// Members of the bitmask `mask` as an id list.
pub(crate) fn mask_to_set(mask: u64, n: usize) -> Vec<ElementId> {
    (0..n)
        .filter(|&i| mask >> i & 1 == 1)
        .map(ElementId)
        .collect()
}
