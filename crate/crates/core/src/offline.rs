//! Offline post-processing algorithms. Each one declares its approximation
//! factor `α`, which the streaming algorithms turn into their threshold
//! constant.

use std::cmp::Ordering;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::oracle::{normalize, ElementId, Oracle};

/// Default cap on the number of subsets brute force may enumerate.
pub const DEFAULT_BRUTE_FORCE_CAP: u128 = 2_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct OfflineResult {
    /// Sorted ids.
    pub set: Vec<ElementId>,
    pub value: f64,
    pub alpha: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OfflineAlgorithm {
    /// Exact optimum by enumeration; `α = 1`.
    BruteForce { cap: u128 },
    /// Random greedy; `α = 1/e` for non-negative submodular functions.
    RandomGreedy { seed: u64 },
    /// Plain greedy. `1 - 1/e` for monotone objectives only; reported with
    /// that advisory value.
    Greedy,
}

impl OfflineAlgorithm {
    pub fn brute_force() -> Self {
        OfflineAlgorithm::BruteForce {
            cap: DEFAULT_BRUTE_FORCE_CAP,
        }
    }

    pub fn alpha(&self) -> f64 {
        match self {
            OfflineAlgorithm::BruteForce { .. } => 1.0,
            OfflineAlgorithm::RandomGreedy { .. } => (-1.0f64).exp(),
            OfflineAlgorithm::Greedy => 1.0 - (-1.0f64).exp(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            OfflineAlgorithm::BruteForce { .. } => "brute-force",
            OfflineAlgorithm::RandomGreedy { .. } => "random-greedy",
            OfflineAlgorithm::Greedy => "greedy",
        }
    }

    pub fn is_deterministic(&self) -> bool {
        !matches!(self, OfflineAlgorithm::RandomGreedy { .. })
    }

    pub fn solve(&self, oracle: &Oracle, ground: &[ElementId], k: usize) -> Result<OfflineResult> {
        match *self {
            OfflineAlgorithm::BruteForce { cap } => brute_force_with_cap(oracle, ground, k, cap),
            OfflineAlgorithm::RandomGreedy { seed } => random_greedy(oracle, ground, k, seed),
            OfflineAlgorithm::Greedy => plain_greedy(oracle, ground, k),
        }
    }
}

/// `Σ_{i<=k} C(m, i)`, saturating.
pub fn subsets_up_to(m: usize, k: usize) -> u128 {
    let mut total: u128 = 0;
    let mut binom: u128 = 1;
    for i in 0..=k.min(m) {
        total = total.saturating_add(binom);
        binom = binom.saturating_mul((m - i) as u128) / (i as u128 + 1);
    }
    total
}

pub fn brute_force(oracle: &Oracle, ground: &[ElementId], k: usize) -> Result<OfflineResult> {
    brute_force_with_cap(oracle, ground, k, DEFAULT_BRUTE_FORCE_CAP)
}

/// Exact `argmax_{S ⊆ U, |S| <= k} f(S)`. Ties go to the lexicographically
/// smallest sorted id list.
pub fn brute_force_with_cap(
    oracle: &Oracle,
    ground: &[ElementId],
    k: usize,
    cap: u128,
) -> Result<OfflineResult> {
    let universe = normalize(ground, oracle.n())?;
    let count = subsets_up_to(universe.len(), k);
    if count > cap {
        return Err(Error::BruteForceCap {
            universe: universe.len(),
            k,
            count,
            cap,
        });
    }
    let mut best_set = Vec::new();
    let mut best_value = oracle.evaluate(&[])?;
    let mut current = Vec::with_capacity(k);
    let mut stack: Vec<usize> = Vec::with_capacity(k);
    // Depth-first walk over index combinations visits sets in lexicographic
    // order, so replacing only on strict improvement keeps the smallest.
    let mut next = 0usize;
    loop {
        if stack.len() < k && next < universe.len() {
            stack.push(next);
            current.push(universe[next]);
            let value = oracle.evaluate(&current)?;
            if value > best_value {
                best_value = value;
                best_set = current.clone();
            }
            next += 1;
        } else {
            match stack.pop() {
                Some(last) => {
                    current.pop();
                    next = last + 1;
                }
                None => break,
            }
        }
    }
    Ok(OfflineResult {
        set: best_set,
        value: best_value,
        alpha: 1.0,
    })
}

/// Random greedy: in each of `k` rounds take the (up to) `k` elements of
/// largest positive marginal, pad with zero-marginal dummies to `k` slots,
/// and add a uniformly random slot (a dummy adds nothing).
pub fn random_greedy(
    oracle: &Oracle,
    ground: &[ElementId],
    k: usize,
    seed: u64,
) -> Result<OfflineResult> {
    let universe = normalize(ground, oracle.n())?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut set: Vec<ElementId> = Vec::with_capacity(k);
    let mut value = oracle.evaluate(&set)?;
    for _ in 0..k {
        let mut gains: Vec<(ElementId, f64, f64)> = Vec::new();
        for &e in &universe {
            if set.contains(&e) {
                continue;
            }
            let with = oracle.evaluate_with(&set, e)?;
            if with - value > 0.0 {
                gains.push((e, with - value, with));
            }
        }
        gains.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        gains.truncate(k);
        let slot = rng.gen_range(0..k);
        if let Some(&(e, _, with)) = gains.get(slot) {
            set.push(e);
            value = with;
        }
    }
    set.sort_unstable();
    Ok(OfflineResult {
        set,
        value,
        alpha: OfflineAlgorithm::RandomGreedy { seed }.alpha(),
    })
}

/// Plain greedy: add the best positive-marginal element until `|S| = k` or
/// no element helps. Ties go to the lowest id.
pub fn plain_greedy(oracle: &Oracle, ground: &[ElementId], k: usize) -> Result<OfflineResult> {
    let universe = normalize(ground, oracle.n())?;
    let mut set: Vec<ElementId> = Vec::with_capacity(k);
    let mut value = oracle.evaluate(&set)?;
    while set.len() < k {
        let mut best: Option<(ElementId, f64)> = None;
        for &e in &universe {
            if set.contains(&e) {
                continue;
            }
            let with = oracle.evaluate_with(&set, e)?;
            let better = match best {
                None => true,
                Some((_, b)) => with.partial_cmp(&b) == Some(Ordering::Greater),
            };
            if better {
                best = Some((e, with));
            }
        }
        match best {
            Some((e, with)) if with > value => {
                set.push(e);
                value = with;
            }
            _ => break,
        }
    }
    set.sort_unstable();
    Ok(OfflineResult {
        set,
        value,
        alpha: OfflineAlgorithm::Greedy.alpha(),
    })
}
