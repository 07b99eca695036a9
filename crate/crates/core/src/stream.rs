//! Shared streaming plumbing.

use crate::error::Result;
use crate::oracle::{ElementId, Oracle};

/// Final answer of a streaming run.
#[derive(Debug, Clone, PartialEq)]
pub struct StreamOutput {
    /// Sorted ids.
    pub set: Vec<ElementId>,
    pub value: f64,
}

impl StreamOutput {
    pub fn empty(oracle: &Oracle) -> Result<Self> {
        Ok(StreamOutput {
            set: Vec::new(),
            value: oracle.evaluate(&[])?,
        })
    }

    pub fn from_set(oracle: &Oracle, mut set: Vec<ElementId>) -> Result<Self> {
        set.sort_unstable();
        let value = oracle.evaluate(&set)?;
        Ok(StreamOutput { set, value })
    }
}

/// A single-pass algorithm fed one element at a time.
pub trait StreamProcessor {
    fn process(&mut self, oracle: &Oracle, e: ElementId) -> Result<()>;

    /// Elements currently held across all solutions, banks, grids or
    /// fractional supports.
    fn stored_elements(&self) -> usize;
}

/// Space and per-element cost of a streaming pass.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct StreamStats {
    pub elements: usize,
    pub peak_stored: usize,
    /// Largest number of oracle evaluations spent on a single element.
    pub max_calls_per_element: u64,
}

/// Feeds `stream` to `processor`, tracking peak storage and per-element cost.
pub fn run_stream<P: StreamProcessor + ?Sized>(
    processor: &mut P,
    oracle: &Oracle,
    stream: &[ElementId],
) -> Result<StreamStats> {
    let mut stats = StreamStats {
        peak_stored: processor.stored_elements(),
        ..StreamStats::default()
    };
    for &e in stream {
        let before = oracle.calls();
        processor.process(oracle, e)?;
        stats.elements += 1;
        stats.max_calls_per_element = stats.max_calls_per_element.max(oracle.calls() - before);
        stats.peak_stored = stats.peak_stored.max(processor.stored_elements());
    }
    Ok(stats)
}

/// A named invariant that failed during a run.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub invariant: &'static str,
    /// Zero-based arrival index of the element being processed.
    pub arrival: usize,
    pub detail: String,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "invariant={} arrival={} {}",
            self.invariant, self.arrival, self.detail
        )
    }
}

/// Audit records, rendered as `event=... key=value ...` lines.
#[derive(Debug, Clone, PartialEq)]
pub enum TraceEvent {
    Accept {
        element: ElementId,
        tau: f64,
        slot: usize,
        gain: f64,
    },
    Ladder {
        element: ElementId,
        m: f64,
        added: Vec<i32>,
        removed: Vec<i32>,
    },
    FractionalAccept {
        element: ElementId,
        tau: f64,
        dfdx: f64,
        stderr: f64,
        increment: f64,
    },
    FractionalReject {
        element: ElementId,
        tau: f64,
        dfdx: f64,
        stderr: f64,
    },
    CellAccept {
        element: ElementId,
        rho: f64,
        i: usize,
        j: usize,
        gain: f64,
    },
}

impl std::fmt::Display for TraceEvent {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TraceEvent::Accept {
                element,
                tau,
                slot,
                gain,
            } => write!(f, "event=accept e={element} tau={tau} i={slot} gain={gain}"),
            TraceEvent::Ladder {
                element,
                m,
                added,
                removed,
            } => write!(
                f,
                "event=ladder e={element} m={m} added={added:?} removed={removed:?}"
            ),
            TraceEvent::FractionalAccept {
                element,
                tau,
                dfdx,
                stderr,
                increment,
            } => write!(
                f,
                "event=accept e={element} tau={tau} dFdx={dfdx} stderr={stderr} inc={increment}"
            ),
            TraceEvent::FractionalReject {
                element,
                tau,
                dfdx,
                stderr,
            } => write!(
                f,
                "event=reject e={element} tau={tau} dFdx={dfdx} stderr={stderr}"
            ),
            TraceEvent::CellAccept {
                element,
                rho,
                i,
                j,
                gain,
            } => write!(f, "event=accept e={element} rho={rho} i={i} j={j} gain={gain}"),
        }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Counter-based hash of `(seed, a, b)`; the same inputs always give the same
/// 64 bits, independent of call order.
pub fn mix_seed(seed: u64, a: u64, b: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(seed) ^ a) ^ b.rotate_left(17))
}

/// Maps a 64-bit hash uniformly onto `0..m` by multiply-shift.
pub fn bounded(hash: u64, m: usize) -> usize {
    ((hash as u128 * m as u128) >> 64) as usize
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mix_is_order_free_and_spread() {
        assert_eq!(mix_seed(7, 1, 2), mix_seed(7, 1, 2));
        assert_ne!(mix_seed(7, 1, 2), mix_seed(7, 2, 1));
        assert_ne!(mix_seed(7, 1, 2), mix_seed(8, 1, 2));
        let mut counts = [0usize; 4];
        for e in 0..4000u64 {
            counts[bounded(mix_seed(3, 0, e), 4)] += 1;
        }
        for c in counts {
            assert!((850..1150).contains(&c), "{counts:?}");
        }
    }
}
