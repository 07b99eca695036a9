//! Repeated random partitions with single-threshold greedy per part.
//!
//! Each of `r` repetitions assigns every arriving element to one of `m`
//! parts uniformly at random and runs threshold greedy with threshold `ρ`
//! inside that part. The parts themselves are never stored: the part of
//! element `e` in repetition `i` is a pure function of `(seed, i, e)`, so
//! tests can rebuild them afterwards.

pub mod analysis;

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::offline::OfflineAlgorithm;
use crate::oracle::{ElementId, Oracle};
use crate::stream::{bounded, mix_seed, StreamOutput, StreamProcessor, TraceEvent, Violation};
use crate::threshold::PartialSolution;
use crate::TOLERANCE;

pub const CELL_BOUND: &str = "cell-value-bound";
pub const CELL_SIZE: &str = "cell-size-bound";

/// Default constant in the repetition count.
pub const DEFAULT_C_R: f64 = 2.0;

/// `r = ⌈c_r · ln(1/ε) / ε⌉`, at least 1.
pub fn repetitions(epsilon: f64, c_r: f64) -> usize {
    let r = (c_r * (1.0 / epsilon).ln() / epsilon - 1e-9).ceil();
    r.max(1.0) as usize
}

/// `m = ⌈1/ε⌉`.
pub fn parts(epsilon: f64) -> usize {
    ((1.0 / epsilon) - 1e-9).ceil().max(1.0) as usize
}

/// `ρ = α/(1+α) · estimate/k`.
pub fn rho_for(alpha: f64, estimate: f64, k: usize) -> f64 {
    alpha / (1.0 + alpha) * estimate / k as f64
}

/// Threshold greedy over `stream` in the given order. Returns the accepted
/// elements in arrival order.
pub fn st_greedy(oracle: &Oracle, stream: &[ElementId], k: usize, rho: f64) -> Result<Vec<ElementId>> {
    let mut sol = PartialSolution::new(k, oracle.evaluate(&[])?);
    for &e in stream {
        if sol.is_full() {
            break;
        }
        let with = sol.value_with(oracle, e, None)?;
        if with - sol.value() >= rho {
            sol.push(e, with);
        }
    }
    Ok(sol.elements().to_vec())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RandomizedConfig {
    pub epsilon: f64,
    pub c_r: f64,
    pub seed: u64,
}

impl RandomizedConfig {
    pub fn new(epsilon: f64, seed: u64) -> Result<Self> {
        Self::with_c_r(epsilon, DEFAULT_C_R, seed)
    }

    pub fn with_c_r(epsilon: f64, c_r: f64, seed: u64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::InvalidParameter(format!("epsilon {epsilon} not in (0, 1)")));
        }
        if c_r.is_nan() || c_r <= 0.0 {
            return Err(Error::InvalidParameter(format!("c_r {c_r} must be positive")));
        }
        Ok(RandomizedConfig { epsilon, c_r, seed })
    }

    pub fn repetitions(&self) -> usize {
        repetitions(self.epsilon, self.c_r)
    }

    pub fn parts(&self) -> usize {
        parts(self.epsilon)
    }
}

/// The `r × m` grid for one threshold `ρ`.
#[derive(Debug, Clone)]
pub struct RandomizedState {
    r: usize,
    m: usize,
    k: usize,
    rho: f64,
    seed: u64,
    grid: Vec<Vec<PartialSolution>>,
    arrivals: usize,
    checks: bool,
    violations: Vec<Violation>,
    trace: Option<Vec<TraceEvent>>,
}

impl RandomizedState {
    pub fn new(oracle: &Oracle, k: usize, rho: f64, config: &RandomizedConfig) -> Result<Self> {
        Self::with_shape(k, rho, config.repetitions(), config.parts(), config.seed, oracle.evaluate(&[])?)
    }

    pub fn with_shape(k: usize, rho: f64, r: usize, m: usize, seed: u64, empty_value: f64) -> Result<Self> {
        if k == 0 || r == 0 || m == 0 {
            return Err(Error::InvalidParameter("k, r and m must be >= 1".into()));
        }
        Ok(RandomizedState {
            r,
            m,
            k,
            rho,
            seed,
            grid: vec![vec![PartialSolution::new(k, empty_value); m]; r],
            arrivals: 0,
            checks: true,
            violations: Vec::new(),
            trace: None,
        })
    }

    pub fn with_trace(mut self) -> Self {
        self.trace = Some(Vec::new());
        self
    }

    pub fn without_checks(mut self) -> Self {
        self.checks = false;
        self
    }

    pub fn repetitions(&self) -> usize {
        self.r
    }

    pub fn parts(&self) -> usize {
        self.m
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn cell(&self, i: usize, j: usize) -> &PartialSolution {
        &self.grid[i][j]
    }

    pub fn violations(&self) -> &[Violation] {
        &self.violations
    }

    pub fn trace(&self) -> Option<&[TraceEvent]> {
        self.trace.as_deref()
    }

    /// The part of `e` in repetition `i`.
    pub fn part_of(&self, i: usize, e: ElementId) -> usize {
        part_of(self.seed, i, e, self.m)
    }

    /// Cell sizes summed over the grid (at most `r·m·k`).
    pub fn stored(&self) -> usize {
        self.grid.iter().flatten().map(PartialSolution::len).sum()
    }

    /// Distinct elements held anywhere in the grid, sorted.
    pub fn union(&self) -> Vec<ElementId> {
        let mut all: Vec<ElementId> = self
            .grid
            .iter()
            .flatten()
            .flat_map(|c| c.elements().iter().copied())
            .collect();
        all.sort_unstable();
        all.dedup();
        all
    }

    pub fn process(&mut self, oracle: &Oracle, e: ElementId) -> Result<()> {
        self.process_with_singleton(oracle, e, None)
    }

    pub(crate) fn process_with_singleton(&mut self, oracle: &Oracle, e: ElementId, singleton: Option<f64>) -> Result<()> {
        let arrival = self.arrivals;
        self.arrivals += 1;
        for i in 0..self.r {
            let j = part_of(self.seed, i, e, self.m);
            let cell = &mut self.grid[i][j];
            if cell.is_full() {
                continue;
            }
            let with = cell.value_with(oracle, e, singleton)?;
            let gain = with - cell.value();
            if gain >= self.rho {
                cell.push(e, with);
                if let Some(t) = self.trace.as_mut() {
                    t.push(TraceEvent::CellAccept {
                        element: e,
                        rho: self.rho,
                        i,
                        j,
                        gain,
                    });
                }
            }
        }
        if self.checks {
            let found = self.cell_violations(arrival);
            self.violations.extend(found);
        }
        Ok(())
    }

    /// `f(S_{i,j}) >= ρ|S_{i,j}|` and `|S_{i,j}| <= k` for every cell.
    pub fn cell_violations(&self, arrival: usize) -> Vec<Violation> {
        let mut out = Vec::new();
        for (i, row) in self.grid.iter().enumerate() {
            for (j, cell) in row.iter().enumerate() {
                let floor = self.rho * cell.len() as f64;
                if cell.value() < floor - TOLERANCE {
                    out.push(Violation {
                        invariant: CELL_BOUND,
                        arrival,
                        detail: format!("rho={} i={i} j={j} f(S)={} < {floor}", self.rho, cell.value()),
                    });
                }
                if cell.len() > self.k {
                    out.push(Violation {
                        invariant: CELL_SIZE,
                        arrival,
                        detail: format!("rho={} i={i} j={j} |S|={}", self.rho, cell.len()),
                    });
                }
            }
        }
        out
    }

    /// The first full cell in `(i, j)` order if any; otherwise the better of
    /// `S_{0,0}` and the offline solution on the grid union (ties keep
    /// `S_{0,0}`).
    pub fn post_process(&self, oracle: &Oracle, offline: &OfflineAlgorithm) -> Result<StreamOutput> {
        if let Some(cell) = self.grid.iter().flatten().find(|c| c.is_full()) {
            return Ok(StreamOutput {
                set: cell.sorted(),
                value: cell.value(),
            });
        }
        let first = &self.grid[0][0];
        let t = offline.solve(oracle, &self.union(), self.k)?;
        if t.value > first.value() {
            Ok(StreamOutput {
                set: t.set,
                value: t.value,
            })
        } else {
            Ok(StreamOutput {
                set: first.sorted(),
                value: first.value(),
            })
        }
    }
}

impl StreamProcessor for RandomizedState {
    fn process(&mut self, oracle: &Oracle, e: ElementId) -> Result<()> {
        RandomizedState::process(self, oracle, e)
    }

    fn stored_elements(&self) -> usize {
        self.stored()
    }
}

/// Part index of `e` in repetition `i`, uniform over `0..m`.
pub fn part_of(seed: u64, i: usize, e: ElementId, m: usize) -> usize {
    bounded(mix_seed(seed, i as u64, e.0 as u64), m)
}

/// Geometric guesses `g = (1+ε)^h` for the optimum over
/// `[v/(1+ε), (1+α)kv/α]`, where `v` is the largest of `f(∅)` and the
/// singleton values seen so far. Each guess runs a grid with
/// `ρ = α/(1+α) · g/k`.
#[derive(Debug, Clone)]
pub struct RandomizedLadder {
    config: RandomizedConfig,
    alpha: f64,
    k: usize,
    empty_value: f64,
    v: f64,
    states: BTreeMap<i32, RandomizedState>,
    arrivals: usize,
    trace: Option<Vec<TraceEvent>>,
    retired_violations: Vec<Violation>,
}

impl RandomizedLadder {
    pub fn new(oracle: &Oracle, k: usize, alpha: f64, config: RandomizedConfig) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidParameter("k must be >= 1".into()));
        }
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::InvalidParameter(format!("alpha {alpha} not in (0, 1]")));
        }
        let empty_value = oracle.evaluate(&[])?;
        let mut ladder = RandomizedLadder {
            config,
            alpha,
            k,
            empty_value,
            v: empty_value,
            states: BTreeMap::new(),
            arrivals: 0,
            trace: None,
            retired_violations: Vec::new(),
        };
        if let Some(range) = ladder.range() {
            for h in range {
                ladder.open(h)?;
            }
        }
        Ok(ladder)
    }

    pub fn with_trace(mut self) -> Self {
        self.trace = Some(Vec::new());
        self
    }

    pub fn v(&self) -> f64 {
        self.v
    }

    pub fn states(&self) -> &BTreeMap<i32, RandomizedState> {
        &self.states
    }

    pub fn guesses(&self) -> Vec<f64> {
        self.states.keys().map(|&h| self.guess(h)).collect()
    }

    pub fn stored(&self) -> usize {
        self.states.values().map(RandomizedState::stored).sum()
    }

    pub fn violations(&self) -> Vec<Violation> {
        let mut all = self.retired_violations.clone();
        for s in self.states.values() {
            all.extend(s.violations().iter().cloned());
        }
        all
    }

    pub fn trace(&self) -> Option<Vec<TraceEvent>> {
        let mut all = self.trace.clone()?;
        for s in self.states.values() {
            all.extend(s.trace().unwrap_or_default().iter().cloned());
        }
        Some(all)
    }

    fn guess(&self, h: i32) -> f64 {
        (1.0 + self.config.epsilon).powi(h)
    }

    fn range(&self) -> Option<std::ops::RangeInclusive<i32>> {
        if self.v.is_nan() || self.v <= 0.0 {
            return None;
        }
        let base = (1.0 + self.config.epsilon).ln();
        let lo = self.v.ln() / base - 1.0;
        let hi = (self.v * (1.0 + self.alpha) * self.k as f64 / self.alpha).ln() / base;
        let (lo, hi) = ((lo - 1e-12).ceil() as i32, (hi + 1e-12).floor() as i32);
        (lo <= hi).then_some(lo..=hi)
    }

    fn open(&mut self, h: i32) -> Result<()> {
        let rho = rho_for(self.alpha, self.guess(h), self.k);
        let mut state = RandomizedState::with_shape(
            self.k,
            rho,
            self.config.repetitions(),
            self.config.parts(),
            self.config.seed,
            self.empty_value,
        )?;
        state.arrivals = self.arrivals;
        if self.trace.is_some() {
            state = state.with_trace();
        }
        self.states.insert(h, state);
        Ok(())
    }

    pub fn process(&mut self, oracle: &Oracle, e: ElementId) -> Result<()> {
        let singleton = oracle.evaluate(&[e])?;
        if singleton > self.v {
            self.v = singleton;
            let range = self.range();
            let removed: Vec<i32> = self
                .states
                .keys()
                .copied()
                .filter(|h| !range.as_ref().is_some_and(|r| r.contains(h)))
                .collect();
            for h in &removed {
                if let Some(s) = self.states.remove(h) {
                    self.retired_violations.extend(s.violations().iter().cloned());
                }
            }
            let mut added = Vec::new();
            if let Some(range) = range {
                for h in range {
                    if !self.states.contains_key(&h) {
                        self.open(h)?;
                        added.push(h);
                    }
                }
            }
            if let Some(t) = self.trace.as_mut() {
                t.push(TraceEvent::Ladder {
                    element: e,
                    m: self.v,
                    added,
                    removed,
                });
            }
        }
        for s in self.states.values_mut() {
            s.process_with_singleton(oracle, e, Some(singleton))?;
        }
        self.arrivals += 1;
        Ok(())
    }

    /// Replays `stream` through a fresh grid for every live guess and
    /// returns the exponents whose grids differ.
    pub fn late_start_mismatches(&self, oracle: &Oracle, stream: &[ElementId]) -> Result<Vec<i32>> {
        let mut out = Vec::new();
        for (&h, s) in &self.states {
            let mut fresh = RandomizedState::with_shape(self.k, s.rho(), s.r, s.m, s.seed, self.empty_value)?.without_checks();
            for &e in stream {
                fresh.process(oracle, e)?;
            }
            if fresh.grid != s.grid {
                out.push(h);
            }
        }
        Ok(out)
    }

    pub fn finalize(&self, oracle: &Oracle, offline: &OfflineAlgorithm) -> Result<StreamOutput> {
        let mut best: Option<StreamOutput> = None;
        for s in self.states.values() {
            let out = s.post_process(oracle, offline)?;
            if best.as_ref().is_none_or(|b| out.value > b.value) {
                best = Some(out);
            }
        }
        match best {
            Some(b) => Ok(b),
            None => StreamOutput::empty(oracle),
        }
    }
}

impl StreamProcessor for RandomizedLadder {
    fn process(&mut self, oracle: &Oracle, e: ElementId) -> Result<()> {
        RandomizedLadder::process(self, oracle, e)
    }

    fn stored_elements(&self) -> usize {
        self.stored()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{ids, make_modular};

    #[test]
    fn default_shape() {
        assert_eq!(repetitions(0.25, 2.0), 12);
        assert_eq!(parts(0.25), 4);
        assert_eq!(parts(0.3), 4);
        assert_eq!(repetitions(0.9, 0.01), 1);
    }

    #[test]
    fn st_greedy_hand_trace() {
        let oracle = make_modular(vec![5.0, 1.0, 4.0]).unwrap();
        assert_eq!(st_greedy(&oracle, &ids(&[0, 1, 2]), 2, 2.0).unwrap(), ids(&[0, 2]));
        assert!(st_greedy(&oracle, &[], 2, 2.0).unwrap().is_empty());
    }

    #[test]
    fn light_elements_never_accepted() {
        let oracle = make_modular(vec![0.5; 6]).unwrap();
        let cfg = RandomizedConfig::new(0.25, 9).unwrap();
        let mut s = RandomizedState::new(&oracle, 2, 1.0, &cfg).unwrap();
        for e in 0..6 {
            s.process(&oracle, ElementId(e)).unwrap();
        }
        assert_eq!(s.stored(), 0);
    }

    #[test]
    fn single_positive_element_is_returned() {
        let oracle = make_modular(vec![0.0, 3.0, 0.0]).unwrap();
        let cfg = RandomizedConfig::new(0.25, 1).unwrap();
        let mut ladder = RandomizedLadder::new(&oracle, 2, 1.0, cfg).unwrap();
        for e in 0..3 {
            ladder.process(&oracle, ElementId(e)).unwrap();
        }
        let out = ladder.finalize(&oracle, &OfflineAlgorithm::brute_force()).unwrap();
        assert_eq!(out.set, ids(&[1]));
        assert_eq!(out.value, 3.0);
    }

    #[test]
    fn zero_function_gives_empty_output() {
        let oracle = make_modular(vec![0.0; 4]).unwrap();
        let cfg = RandomizedConfig::new(0.25, 1).unwrap();
        let mut ladder = RandomizedLadder::new(&oracle, 2, 1.0, cfg).unwrap();
        for e in 0..4 {
            ladder.process(&oracle, ElementId(e)).unwrap();
        }
        assert!(ladder.states().is_empty());
        assert!(ladder.finalize(&oracle, &OfflineAlgorithm::brute_force()).unwrap().set.is_empty());
    }
}
