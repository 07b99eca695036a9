//! Threshold streaming with `p` disjoint partial solutions.
//!
//! A [`SolutionBank`] runs the known-estimate algorithm: an arriving element
//! joins the lowest-index solution `S_i` with `|S_i| < k` and
//! `f(e | S_i) >= cτ/k`, where `c = α/(1+α)`. At the end the offline
//! algorithm runs on `∪ S_i` and the best of the `p + 1` candidates wins.
//!
//! A [`GuessLadder`] removes the need for `τ`: it tracks a lower bound `m` on
//! the optimum and keeps one bank for every guess
//! `(1+ε')^h ∈ [m/(1+ε'), mk/c]`, creating and dropping banks as `m` grows.

use std::collections::BTreeMap;
use std::ops::RangeInclusive;

use crate::error::{Error, Result};
use crate::offline::OfflineAlgorithm;
use crate::oracle::{ElementId, Oracle};
use crate::stream::{StreamOutput, StreamProcessor, TraceEvent, Violation};
use crate::TOLERANCE;

/// Guard applied to log-domain ladder bounds.
const LADDER_GUARD: f64 = 1e-12;

pub const SOLUTION_BOUND: &str = "solution-value-bound";
pub const SOLUTION_SIZE: &str = "solution-size-bound";
pub const LADDER_SHAPE: &str = "ladder-shape";
pub const LATE_START: &str = "late-start-equivalence";
pub const ADMISSION: &str = "threshold-admission";
pub const DISJOINT: &str = "disjoint-solutions";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdConfig {
    pub epsilon: f64,
    pub alpha: f64,
    /// Number of disjoint solutions per guess.
    pub p: usize,
    /// Ladder granularity.
    pub eps_prime: f64,
}

impl ThresholdConfig {
    /// `p = ⌈4/ε⌉`, `ε' = ε/2`.
    pub fn new(epsilon: f64, alpha: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon <= 1.0) {
            return Err(Error::InvalidParameter(format!("epsilon {epsilon} not in (0, 1]")));
        }
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::InvalidParameter(format!("alpha {alpha} not in (0, 1]")));
        }
        Ok(ThresholdConfig {
            epsilon,
            alpha,
            p: default_solution_count(epsilon),
            eps_prime: epsilon / 2.0,
        })
    }

    pub fn with_p(mut self, p: usize) -> Result<Self> {
        if p == 0 {
            return Err(Error::InvalidParameter("p must be >= 1".into()));
        }
        self.p = p;
        Ok(self)
    }

    pub fn with_eps_prime(mut self, eps_prime: f64) -> Result<Self> {
        if !(eps_prime > 0.0 && eps_prime < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "eps_prime {eps_prime} not in (0, 1)"
            )));
        }
        self.eps_prime = eps_prime;
        Ok(self)
    }

    /// `c = α/(1+α) ∈ (0, 1/2]`.
    pub fn c(&self) -> f64 {
        threshold_constant(self.alpha)
    }
}

pub fn threshold_constant(alpha: f64) -> f64 {
    alpha / (1.0 + alpha)
}

/// `⌈4/ε⌉`.
pub fn default_solution_count(epsilon: f64) -> usize {
    ((4.0 / epsilon) - 1e-9).ceil().max(1.0) as usize
}

/// Space budget `C · p · k / ε' · ln(k/c)` for the ladder.
pub fn stored_budget(constant: f64, p: usize, k: usize, eps_prime: f64, c: f64) -> f64 {
    constant * p as f64 * k as f64 / eps_prime * (k as f64 / c).ln()
}

/// An ordered partial solution with its cached value.
#[derive(Debug, Clone, PartialEq)]
pub struct PartialSolution {
    elements: Vec<ElementId>,
    value: f64,
    capacity: usize,
}

impl PartialSolution {
    pub fn new(capacity: usize, empty_value: f64) -> Self {
        PartialSolution {
            elements: Vec::with_capacity(capacity),
            value: empty_value,
            capacity,
        }
    }

    /// Elements in arrival order.
    pub fn elements(&self) -> &[ElementId] {
        &self.elements
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.elements.len() >= self.capacity
    }

    pub fn sorted(&self) -> Vec<ElementId> {
        let mut s = self.elements.clone();
        s.sort_unstable();
        s
    }

    /// `f(S ∪ {e})`, reusing `singleton = f({e})` when `S` is empty.
    pub(crate) fn value_with(
        &self,
        oracle: &Oracle,
        e: ElementId,
        singleton: Option<f64>,
    ) -> Result<f64> {
        match singleton {
            Some(v) if self.elements.is_empty() => Ok(v),
            _ => oracle.evaluate_with(&self.elements, e),
        }
    }

    pub(crate) fn push(&mut self, e: ElementId, new_value: f64) {
        debug_assert!(!self.is_full());
        self.elements.push(e);
        self.value = new_value;
    }

    /// Re-evaluates `f(S)` and reports whether the cache agrees.
    pub fn cache_matches(&self, oracle: &Oracle) -> Result<bool> {
        Ok((oracle.evaluate(&self.elements)? - self.value).abs() <= TOLERANCE)
    }

    /// Recomputes every admission gain along the arrival order and returns the
    /// smallest one (`+∞` for an empty solution).
    pub fn min_admission_gain(&self, oracle: &Oracle) -> Result<f64> {
        let mut prev = oracle.evaluate(&[])?;
        let mut min_gain = f64::INFINITY;
        for i in 1..=self.elements.len() {
            let cur = oracle.evaluate(&self.elements[..i])?;
            min_gain = min_gain.min(cur - prev);
            prev = cur;
        }
        Ok(min_gain)
    }
}

/// Where an element was admitted.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Admission {
    pub slot: usize,
    pub gain: f64,
}

/// `p` disjoint partial solutions sharing one estimate `τ`.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionBank {
    tau: f64,
    c: f64,
    k: usize,
    solutions: Vec<PartialSolution>,
}

impl SolutionBank {
    pub fn new(tau: f64, c: f64, k: usize, p: usize, empty_value: f64) -> Self {
        SolutionBank {
            tau,
            c,
            k,
            solutions: (0..p).map(|_| PartialSolution::new(k, empty_value)).collect(),
        }
    }

    /// A bank for a known estimate, with `f(∅)` read from the oracle.
    pub fn for_estimate(oracle: &Oracle, tau: f64, k: usize, config: &ThresholdConfig) -> Result<Self> {
        Ok(Self::new(tau, config.c(), k, config.p, oracle.evaluate(&[])?))
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Admission threshold `cτ/k`.
    pub fn threshold(&self) -> f64 {
        self.c * self.tau / self.k as f64
    }

    pub fn solutions(&self) -> &[PartialSolution] {
        &self.solutions
    }

    pub fn stored(&self) -> usize {
        self.solutions.iter().map(PartialSolution::len).sum()
    }

    pub fn best_cached_value(&self) -> f64 {
        self.solutions
            .iter()
            .map(PartialSolution::value)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn union(&self) -> Vec<ElementId> {
        let mut all: Vec<ElementId> = self
            .solutions
            .iter()
            .flat_map(|s| s.elements().iter().copied())
            .collect();
        all.sort_unstable();
        all
    }

    /// Inserts `e` into the lowest-index solution that has room and clears the
    /// threshold. At most `p` marginal computations.
    pub fn process(&mut self, oracle: &Oracle, e: ElementId) -> Result<Option<Admission>> {
        self.process_with_singleton(oracle, e, None)
    }

    pub(crate) fn process_with_singleton(
        &mut self,
        oracle: &Oracle,
        e: ElementId,
        singleton: Option<f64>,
    ) -> Result<Option<Admission>> {
        let threshold = self.threshold();
        for (slot, sol) in self.solutions.iter_mut().enumerate() {
            if sol.is_full() {
                continue;
            }
            let with = sol.value_with(oracle, e, singleton)?;
            let gain = with - sol.value();
            if gain >= threshold {
                sol.push(e, with);
                return Ok(Some(Admission { slot, gain }));
            }
        }
        Ok(None)
    }

    /// Best of the offline solution on `∪ S_i` and `S_1..S_p`. Ties prefer
    /// the offline solution, then the lowest index.
    pub fn finalize(&self, oracle: &Oracle, offline: &OfflineAlgorithm) -> Result<StreamOutput> {
        let offline_result = offline.solve(oracle, &self.union(), self.k)?;
        let mut best = StreamOutput {
            set: offline_result.set,
            value: offline_result.value,
        };
        for sol in &self.solutions {
            if sol.value() > best.value {
                best = StreamOutput {
                    set: sol.sorted(),
                    value: sol.value(),
                };
            }
        }
        Ok(best)
    }

    /// Checks the per-solution value and size bounds given the current
    /// ladder lower bound `m` (pass `None` outside a ladder).
    pub fn check_bounds(&self, m: Option<f64>, arrival: usize, out: &mut Vec<Violation>) {
        let per_element = self.threshold();
        for (i, sol) in self.solutions.iter().enumerate() {
            let floor = per_element * sol.len() as f64;
            if sol.value() < floor - TOLERANCE {
                out.push(Violation {
                    invariant: SOLUTION_BOUND,
                    arrival,
                    detail: format!(
                        "tau={} i={i} f(S)={} < c*tau*|S|/k={floor}",
                        self.tau,
                        sol.value()
                    ),
                });
            }
            let mut limit = self.k;
            if let Some(m) = m {
                let bound = m * self.k as f64 / (self.c * self.tau) + 1.0 + TOLERANCE;
                limit = limit.min(bound.floor() as usize);
            }
            if sol.len() > limit {
                out.push(Violation {
                    invariant: SOLUTION_SIZE,
                    arrival,
                    detail: format!("tau={} i={i} |S|={} > {limit}", self.tau, sol.len()),
                });
            }
        }
    }

    /// Pairwise disjointness of the solutions.
    pub fn check_disjoint(&self, arrival: usize, out: &mut Vec<Violation>) {
        let all = self.union();
        if all.windows(2).any(|w| w[0] == w[1]) {
            out.push(Violation {
                invariant: DISJOINT,
                arrival,
                detail: format!("tau={} solutions overlap", self.tau),
            });
        }
    }

    /// Recomputes every admission gain and flags those below `cτ/k`.
    pub fn audit_admissions(&self, oracle: &Oracle) -> Result<Vec<Violation>> {
        let mut out = Vec::new();
        for (i, sol) in self.solutions.iter().enumerate() {
            let gain = sol.min_admission_gain(oracle)?;
            if gain < self.threshold() - TOLERANCE {
                out.push(Violation {
                    invariant: ADMISSION,
                    arrival: 0,
                    detail: format!(
                        "tau={} i={i} admitted gain {gain} < threshold {}",
                        self.tau,
                        self.threshold()
                    ),
                });
            }
        }
        Ok(out)
    }
}

impl StreamProcessor for SolutionBank {
    fn process(&mut self, oracle: &Oracle, e: ElementId) -> Result<()> {
        SolutionBank::process(self, oracle, e).map(|_| ())
    }

    fn stored_elements(&self) -> usize {
        self.stored()
    }
}

/// Exponents `h` with `m/(1+ε') <= (1+ε')^h <= mk/c`; `None` when `m <= 0`.
pub fn guess_exponents(m: f64, k: usize, c: f64, eps_prime: f64) -> Option<RangeInclusive<i32>> {
    if m.is_nan() || m <= 0.0 {
        return None;
    }
    let base = (1.0 + eps_prime).ln();
    let lo = m.ln() / base - 1.0;
    let hi = (m.ln() + (k as f64).ln() - c.ln()) / base;
    let h_lo = (lo - LADDER_GUARD).ceil() as i32;
    let h_hi = (hi + LADDER_GUARD).floor() as i32;
    (h_lo <= h_hi).then_some(h_lo..=h_hi)
}

/// The threshold algorithm without a known estimate.
#[derive(Debug, Clone)]
pub struct GuessLadder {
    config: ThresholdConfig,
    k: usize,
    empty_value: f64,
    m: f64,
    banks: BTreeMap<i32, SolutionBank>,
    /// Arrival index at which each live bank was created; 0 for banks present
    /// before the first element.
    created_at: BTreeMap<i32, usize>,
    arrivals: usize,
    checks: bool,
    violations: Vec<Violation>,
    trace: Option<Vec<TraceEvent>>,
}

impl GuessLadder {
    /// Initialises `m = f(∅)` and the matching ladder.
    pub fn new(oracle: &Oracle, k: usize, config: ThresholdConfig) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidParameter("k must be >= 1".into()));
        }
        let empty_value = oracle.evaluate(&[])?;
        let mut ladder = GuessLadder {
            config,
            k,
            empty_value,
            m: empty_value,
            banks: BTreeMap::new(),
            created_at: BTreeMap::new(),
            arrivals: 0,
            checks: true,
            violations: Vec::new(),
            trace: None,
        };
        if let Some(range) = ladder.range() {
            for h in range {
                ladder.open_bank(h);
            }
        }
        Ok(ladder)
    }

    /// Records `event=...` audit lines.
    pub fn with_trace(mut self) -> Self {
        self.trace = Some(Vec::new());
        self
    }

    /// Disables per-element invariant checks.
    pub fn without_checks(mut self) -> Self {
        self.checks = false;
        self
    }

    pub fn config(&self) -> &ThresholdConfig {
        &self.config
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn c(&self) -> f64 {
        self.config.c()
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn arrivals(&self) -> usize {
        self.arrivals
    }

    pub fn banks(&self) -> &BTreeMap<i32, SolutionBank> {
        &self.banks
    }

    pub fn exponents(&self) -> Vec<i32> {
        self.banks.keys().copied().collect()
    }

    pub fn guesses(&self) -> Vec<f64> {
        self.banks.values().map(SolutionBank::tau).collect()
    }

    /// Arrival index at which the bank for exponent `h` was opened.
    pub fn created_at(&self, h: i32) -> Option<usize> {
        self.created_at.get(&h).copied()
    }

    pub fn violations(&self) -> &[Violation] {
        &self.violations
    }

    pub fn trace(&self) -> Option<&[TraceEvent]> {
        self.trace.as_deref()
    }

    pub fn stored(&self) -> usize {
        self.banks.values().map(SolutionBank::stored).sum()
    }

    /// Space budget with constant `C`.
    pub fn stored_budget(&self, constant: f64) -> f64 {
        stored_budget(constant, self.config.p, self.k, self.config.eps_prime, self.c())
    }

    fn range(&self) -> Option<RangeInclusive<i32>> {
        guess_exponents(self.m, self.k, self.c(), self.config.eps_prime)
    }

    fn tau_of(&self, h: i32) -> f64 {
        (1.0 + self.config.eps_prime).powi(h)
    }

    fn open_bank(&mut self, h: i32) {
        let bank = SolutionBank::new(self.tau_of(h), self.c(), self.k, self.config.p, self.empty_value);
        self.banks.insert(h, bank);
        self.created_at.insert(h, self.arrivals);
    }

    pub fn process(&mut self, oracle: &Oracle, e: ElementId) -> Result<()> {
        let arrival = self.arrivals;
        let singleton = oracle.evaluate(&[e])?;
        let best_cached = self
            .banks
            .values()
            .map(SolutionBank::best_cached_value)
            .fold(f64::NEG_INFINITY, f64::max);
        let m_new = singleton.max(best_cached);
        if self.m < m_new {
            self.m = m_new;
            let range = self.range();
            let removed: Vec<i32> = self
                .banks
                .keys()
                .copied()
                .filter(|h| !range.as_ref().is_some_and(|r| r.contains(h)))
                .collect();
            for h in &removed {
                self.banks.remove(h);
                self.created_at.remove(h);
            }
            let mut added = Vec::new();
            if let Some(range) = range {
                for h in range {
                    if !self.banks.contains_key(&h) {
                        self.open_bank(h);
                        added.push(h);
                    }
                }
            }
            if let Some(trace) = self.trace.as_mut() {
                trace.push(TraceEvent::Ladder {
                    element: e,
                    m: self.m,
                    added,
                    removed,
                });
            }
        }

        for bank in self.banks.values_mut() {
            if let Some(adm) = bank.process_with_singleton(oracle, e, Some(singleton))? {
                if let Some(trace) = self.trace.as_mut() {
                    trace.push(TraceEvent::Accept {
                        element: e,
                        tau: bank.tau(),
                        slot: adm.slot,
                        gain: adm.gain,
                    });
                }
            }
        }

        if self.checks {
            self.check_invariants(arrival);
        }
        self.arrivals += 1;
        Ok(())
    }

    fn check_invariants(&mut self, arrival: usize) {
        let mut found = Vec::new();
        for bank in self.banks.values() {
            bank.check_bounds(Some(self.m), arrival, &mut found);
            bank.check_disjoint(arrival, &mut found);
        }
        if let Some(detail) = self.ladder_shape_mismatch() {
            found.push(Violation {
                invariant: LADDER_SHAPE,
                arrival,
                detail,
            });
        }
        let c = self.c();
        if !(c > 0.0 && c <= 0.5) {
            found.push(Violation {
                invariant: LADDER_SHAPE,
                arrival,
                detail: format!("c = {c} outside (0, 1/2]"),
            });
        }
        self.violations.extend(found);
    }

    /// Compares the live exponents with the closed-form guess set, using
    /// direct powers instead of the log-domain range.
    pub fn ladder_shape_mismatch(&self) -> Option<String> {
        let keys = self.exponents();
        if self.m.is_nan() || self.m <= 0.0 {
            return (!keys.is_empty()).then(|| format!("m = {} but T = {keys:?}", self.m));
        }
        let b = 1.0 + self.config.eps_prime;
        let lo = self.m / b;
        let hi = self.m * self.k as f64 / self.c();
        let rel = 1e-9;
        let inside = |h: i32| {
            let t = b.powi(h);
            t >= lo * (1.0 - rel) && t <= hi * (1.0 + rel)
        };
        let strictly_inside = |h: i32| {
            let t = b.powi(h);
            t >= lo * (1.0 + rel) && t <= hi * (1.0 - rel)
        };
        let (Some(&first), Some(&last)) = (keys.first(), keys.last()) else {
            return Some(format!("m = {} > 0 but T is empty", self.m));
        };
        if keys.windows(2).any(|w| w[1] != w[0] + 1) {
            return Some(format!("exponents not contiguous: {keys:?}"));
        }
        if !inside(first) || !inside(last) {
            return Some(format!("exponent range {first}..={last} leaves [{lo}, {hi}]"));
        }
        if strictly_inside(first - 1) || strictly_inside(last + 1) {
            return Some(format!("exponent range {first}..={last} misses guesses in [{lo}, {hi}]"));
        }
        None
    }

    /// Whether some live guess lies in `[(1-ε')·opt, opt]`.
    pub fn contains_estimate_for(&self, opt: f64) -> bool {
        let low = (1.0 - self.config.eps_prime) * opt;
        self.guesses()
            .iter()
            .any(|&t| t >= low - TOLERANCE && t <= opt + TOLERANCE)
    }

    /// Replays `stream` (the full prefix seen so far) through a fresh bank for
    /// every live guess and reports banks whose solutions differ.
    pub fn late_start_mismatches(&self, oracle: &Oracle, stream: &[ElementId]) -> Result<Vec<Violation>> {
        let mut out = Vec::new();
        for (&h, bank) in &self.banks {
            let mut fresh = SolutionBank::new(bank.tau(), self.c(), self.k, self.config.p, self.empty_value);
            for &e in stream {
                fresh.process(oracle, e)?;
            }
            let same = fresh
                .solutions()
                .iter()
                .zip(bank.solutions())
                .all(|(a, b)| a.elements() == b.elements());
            if !same {
                out.push(Violation {
                    invariant: LATE_START,
                    arrival: self.created_at(h).unwrap_or(0),
                    detail: format!("tau={} (h={h}) differs from a from-start replay", bank.tau()),
                });
            }
        }
        Ok(out)
    }

    /// Recomputes admission gains in every live bank.
    pub fn audit_admissions(&self, oracle: &Oracle) -> Result<Vec<Violation>> {
        let mut out = Vec::new();
        for bank in self.banks.values() {
            out.extend(bank.audit_admissions(oracle)?);
        }
        Ok(out)
    }

    /// Best `S̄_τ` over the live guesses, or `∅` when the ladder is empty.
    pub fn finalize(&self, oracle: &Oracle, offline: &OfflineAlgorithm) -> Result<StreamOutput> {
        let mut best: Option<StreamOutput> = None;
        for bank in self.banks.values() {
            let candidate = bank.finalize(oracle, offline)?;
            if best.as_ref().is_none_or(|b| candidate.value > b.value) {
                best = Some(candidate);
            }
        }
        match best {
            Some(b) => Ok(b),
            None => StreamOutput::empty(oracle),
        }
    }
}

impl StreamProcessor for GuessLadder {
    fn process(&mut self, oracle: &Oracle, e: ElementId) -> Result<()> {
        GuessLadder::process(self, oracle, e)
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
    fn default_parameters() {
        let cfg = ThresholdConfig::new(0.2, 1.0).unwrap();
        assert_eq!(cfg.p, 20);
        assert_eq!(cfg.eps_prime, 0.1);
        assert_eq!(cfg.c(), 0.5);
        assert_eq!(default_solution_count(0.3), 14);
        assert_eq!(default_solution_count(1.0), 4);
        assert!(ThresholdConfig::new(0.0, 1.0).is_err());
        assert!(ThresholdConfig::new(0.5, 1.5).is_err());
    }

    #[test]
    fn full_bank_discards() {
        let oracle = make_modular(vec![5.0, 5.0, 5.0]).unwrap();
        let mut bank = SolutionBank::new(1.0, 0.5, 1, 1, 0.0);
        assert!(bank.process(&oracle, ElementId(0)).unwrap().is_some());
        let before = bank.clone();
        assert!(bank.process(&oracle, ElementId(1)).unwrap().is_none());
        assert_eq!(bank, before);
    }

    #[test]
    fn first_slot_takes_heavy_element() {
        let oracle = make_modular(vec![3.0]).unwrap();
        // threshold = 0.5 * 4 / 2 = 1
        let mut bank = SolutionBank::new(4.0, 0.5, 2, 3, 0.0);
        let adm = bank.process(&oracle, ElementId(0)).unwrap().unwrap();
        assert_eq!(adm.slot, 0);
        assert_eq!(adm.gain, 3.0);
        assert_eq!(bank.solutions()[0].elements(), &ids(&[0])[..]);
    }

    #[test]
    fn exponents_for_unit_m() {
        // m = 1, k = 2, c = 1/2, eps' = 1: [1/2, 4] contains 2^-1..=2^2.
        assert_eq!(guess_exponents(1.0, 2, 0.5, 1.0), Some(-1..=2));
        assert_eq!(guess_exponents(0.0, 2, 0.5, 1.0), None);
    }

    #[test]
    fn zero_function_keeps_ladder_empty() {
        let oracle = make_modular(vec![0.0; 4]).unwrap();
        let mut ladder = GuessLadder::new(&oracle, 2, ThresholdConfig::new(0.5, 1.0).unwrap()).unwrap();
        for e in 0..4 {
            ladder.process(&oracle, ElementId(e)).unwrap();
        }
        assert!(ladder.banks().is_empty());
        assert_eq!(ladder.stored(), 0);
        let out = ladder.finalize(&oracle, &OfflineAlgorithm::brute_force()).unwrap();
        assert!(out.set.is_empty());
        assert!(ladder.violations().is_empty());
    }

    #[test]
    fn first_positive_element_opens_ladder() {
        let oracle = make_modular(vec![2.0, 1.0]).unwrap();
        let cfg = ThresholdConfig::new(0.5, 1.0).unwrap();
        let mut ladder = GuessLadder::new(&oracle, 2, cfg).unwrap();
        ladder.process(&oracle, ElementId(0)).unwrap();
        assert_eq!(ladder.m(), 2.0);
        let (lo, hi) = (2.0 / 1.25, 2.0 * 2.0 / 0.5);
        for (&h, bank) in ladder.banks() {
            let tau = bank.tau();
            assert!(tau >= lo * (1.0 - 1e-12) && tau <= hi * (1.0 + 1e-12), "h={h}");
            let accepted = !bank.solutions()[0].is_empty();
            assert_eq!(accepted, 2.0 >= 0.5 * tau / 2.0, "tau={tau}");
        }
        assert!(ladder.ladder_shape_mismatch().is_none());
    }
}
