//! Fractional threshold streaming over the multilinear extension.
//!
//! The state is a point `x` of the cardinality polytope. An arriving element
//! whose partial derivative `∂_e F(x)` clears `cτ/k` receives
//! `min{p, k - ‖x‖₁}` mass; once `‖x‖₁ = k` nothing changes. At the end `x`
//! is rounded and the offline algorithm runs on `supp(x)`.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::extensions::{multilinear_exact, partial_derivative, DerivativeMode, Estimate, FractionalPoint};
use crate::offline::OfflineAlgorithm;
use crate::oracle::{ElementId, Oracle};
use crate::rounding::{round, RoundingMode};
use crate::stream::{mix_seed, StreamOutput, StreamProcessor, TraceEvent, Violation};
use crate::threshold::guess_exponents;
use crate::TOLERANCE;

/// Mass within this distance of `k` counts as full.
const FROZEN_GUARD: f64 = 1e-12;

pub const STRUCTURE: &str = "fractional-structure";
pub const SUPPORT_BUDGET: &str = "support-budget";
pub const MASS_BOUND: &str = "mass-bound";
pub const FULL_MASS_VALUE: &str = "full-mass-value";
pub const REJECTION_BOUND: &str = "rejection-bound";
pub const OPT_GAP: &str = "opt-completion-gap";
pub const LATE_START: &str = "late-start-equivalence";
pub const LADDER_SHAPE: &str = "ladder-shape";

/// Parameters shared by every guess.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtensionParams {
    pub alpha: f64,
    /// Per-element increment.
    pub p: f64,
    pub mode: DerivativeMode,
}

impl ExtensionParams {
    pub fn new(alpha: f64, p: f64, mode: DerivativeMode) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::InvalidParameter(format!("alpha {alpha} not in (0, 1]")));
        }
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::InvalidParameter(format!("p {p} not in (0, 1)")));
        }
        if let DerivativeMode::Sampled { samples: 0, .. } = mode {
            return Err(Error::InvalidParameter("samples must be >= 1".into()));
        }
        Ok(ExtensionParams { alpha, p, mode })
    }

    /// `p = ε/2`.
    pub fn for_epsilon(epsilon: f64, alpha: f64, mode: DerivativeMode) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon <= 1.0) {
            return Err(Error::InvalidParameter(format!("epsilon {epsilon} not in (0, 1]")));
        }
        Self::new(alpha, epsilon / 2.0, mode)
    }

    /// `c = α(1-p)/(1+α)`.
    pub fn c(&self) -> f64 {
        self.alpha * (1.0 - self.p) / (1.0 + self.alpha)
    }

    /// `⌈k/p⌉`.
    pub fn support_budget(&self, k: usize) -> usize {
        (k as f64 / self.p - 1e-9).ceil() as usize
    }

    /// Sampled derivatives are re-seeded per element so that a bank started
    /// late reproduces a from-start run.
    fn mode_for(&self, e: ElementId) -> DerivativeMode {
        match self.mode {
            DerivativeMode::Exact => DerivativeMode::Exact,
            DerivativeMode::Sampled { samples, seed } => DerivativeMode::Sampled {
                samples,
                seed: mix_seed(seed, 0x5eed, e.0 as u64),
            },
        }
    }
}

/// A rejected element and its derivative at rejection time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rejection {
    pub element: ElementId,
    pub arrival: usize,
    pub derivative: Estimate,
}

/// Fractional solution for one estimate `τ`.
#[derive(Debug, Clone)]
pub struct FractionalStream {
    params: ExtensionParams,
    tau: f64,
    k: usize,
    x: FractionalPoint,
    mass: f64,
    /// Support in arrival order.
    order: Vec<ElementId>,
    rejections: Vec<Rejection>,
    arrivals: usize,
    checks: bool,
    full_checked: bool,
    violations: Vec<Violation>,
    trace: Option<Vec<TraceEvent>>,
}

impl FractionalStream {
    pub fn new(n: usize, tau: f64, k: usize, params: ExtensionParams) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidParameter("k must be >= 1".into()));
        }
        Ok(FractionalStream {
            params,
            tau,
            k,
            x: FractionalPoint::zeros(n),
            mass: 0.0,
            order: Vec::new(),
            rejections: Vec::new(),
            arrivals: 0,
            checks: true,
            full_checked: false,
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

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn params(&self) -> &ExtensionParams {
        &self.params
    }

    pub fn threshold(&self) -> f64 {
        self.params.c() * self.tau / self.k as f64
    }

    pub fn point(&self) -> &FractionalPoint {
        &self.x
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    /// Support in arrival order.
    pub fn support_in_order(&self) -> &[ElementId] {
        &self.order
    }

    pub fn is_frozen(&self) -> bool {
        self.k as f64 - self.mass <= FROZEN_GUARD
    }

    pub fn rejections(&self) -> &[Rejection] {
        &self.rejections
    }

    pub fn violations(&self) -> &[Violation] {
        &self.violations
    }

    pub fn trace(&self) -> Option<&[TraceEvent]> {
        self.trace.as_deref()
    }

    pub fn stored(&self) -> usize {
        self.order.len()
    }

    pub fn process(&mut self, oracle: &Oracle, e: ElementId) -> Result<()> {
        let arrival = self.arrivals;
        self.arrivals += 1;
        if self.is_frozen() {
            return Ok(());
        }
        if self.x.get(e) > 0.0 {
            return Err(Error::DuplicateElement(e));
        }
        let d = partial_derivative(oracle, &self.x, e, self.params.mode_for(e))?;
        if d.mean >= self.threshold() {
            let inc = self.params.p.min(self.k as f64 - self.mass);
            self.x.set(e, inc)?;
            self.mass += inc;
            self.order.push(e);
            if let Some(t) = self.trace.as_mut() {
                t.push(TraceEvent::FractionalAccept {
                    element: e,
                    tau: self.tau,
                    dfdx: d.mean,
                    stderr: d.stderr,
                    increment: inc,
                });
            }
        } else {
            self.rejections.push(Rejection {
                element: e,
                arrival,
                derivative: d,
            });
            if let Some(t) = self.trace.as_mut() {
                t.push(TraceEvent::FractionalReject {
                    element: e,
                    tau: self.tau,
                    dfdx: d.mean,
                    stderr: d.stderr,
                });
            }
        }
        if self.checks {
            self.check_invariants(oracle, arrival)?;
        }
        Ok(())
    }

    /// Structure and budget invariants; the full-mass value bound is checked
    /// once, when the state freezes, in exact mode.
    fn check_invariants(&mut self, oracle: &Oracle, arrival: usize) -> Result<()> {
        let mut found = self.structure_violations(arrival);
        if self.is_frozen() && !self.full_checked && self.params.mode == DerivativeMode::Exact {
            self.full_checked = true;
            let value = multilinear_exact(oracle, &self.x)?;
            let bound = self.params.c() * self.tau;
            if value < bound - TOLERANCE {
                found.push(Violation {
                    invariant: FULL_MASS_VALUE,
                    arrival,
                    detail: format!("tau={} F(x)={value} < c*tau={bound}", self.tau),
                });
            }
        }
        self.violations.extend(found);
        Ok(())
    }

    /// Every coordinate equals `p` except at most one smaller coordinate,
    /// which may exist only when the mass is `k`; plus the mass and support
    /// bounds.
    pub fn structure_violations(&self, arrival: usize) -> Vec<Violation> {
        let mut out = Vec::new();
        let p = self.params.p;
        let norm = self.x.norm1();
        if norm > self.k as f64 + TOLERANCE {
            out.push(Violation {
                invariant: MASS_BOUND,
                arrival,
                detail: format!("tau={} |x|={norm} > k={}", self.tau, self.k),
            });
        }
        let smaller: Vec<(ElementId, f64)> = self
            .x
            .iter()
            .filter(|&(_, v)| (v - p).abs() > FROZEN_GUARD)
            .collect();
        let structure_ok = match smaller.as_slice() {
            [] => true,
            [(_, v)] => *v < p && self.k as f64 - norm <= TOLERANCE,
            _ => false,
        };
        if !structure_ok {
            out.push(Violation {
                invariant: STRUCTURE,
                arrival,
                detail: format!("tau={} off-level coordinates {smaller:?} with |x|={norm}", self.tau),
            });
        }
        let budget = self.params.support_budget(self.k);
        if self.x.support_len() > budget {
            out.push(Violation {
                invariant: SUPPORT_BUDGET,
                arrival,
                detail: format!("tau={} |supp|={} > {budget}", self.tau, self.x.support_len()),
            });
        }
        out
    }

    /// Recomputes the derivative of every rejected element at the final point
    /// and flags those at or above the threshold. Exact mode only.
    pub fn final_rejection_violations(&self, oracle: &Oracle) -> Result<Vec<Violation>> {
        let mut out = Vec::new();
        for r in &self.rejections {
            let d = partial_derivative(oracle, &self.x, r.element, DerivativeMode::Exact)?;
            if d.mean >= self.threshold() + TOLERANCE {
                out.push(Violation {
                    invariant: REJECTION_BOUND,
                    arrival: r.arrival,
                    detail: format!(
                        "tau={} e={} dFdx(final)={} >= {}",
                        self.tau,
                        r.element,
                        d.mean,
                        self.threshold()
                    ),
                });
            }
        }
        Ok(out)
    }

    /// For a stream that ended below full mass, compares
    /// `F(x + 1_{OPT∖supp})` with `F(x) + bcτ`, `b = |OPT∖supp|/k`.
    /// Returns `(lhs, rhs)`, or `None` when the mass is `k`.
    pub fn opt_completion_gap(&self, oracle: &Oracle, opt: &[ElementId]) -> Result<Option<(f64, f64)>> {
        if self.is_frozen() {
            return Ok(None);
        }
        let outside: Vec<ElementId> = opt.iter().copied().filter(|&e| self.x.get(e) == 0.0).collect();
        let mut raised = self.x.clone();
        for &e in &outside {
            raised.set(e, 1.0)?;
        }
        let lhs = multilinear_exact(oracle, &raised)?;
        let b = outside.len() as f64 / self.k as f64;
        let rhs = multilinear_exact(oracle, &self.x)? + b * self.params.c() * self.tau;
        Ok(Some((lhs, rhs)))
    }

    /// Better of the rounded point and the offline solution on the support;
    /// ties go to the rounded point.
    pub fn finalize(
        &self,
        oracle: &Oracle,
        offline: &OfflineAlgorithm,
        rounding: RoundingMode,
    ) -> Result<StreamOutput> {
        let rounded = StreamOutput::from_set(oracle, round(oracle, &self.x, self.k, rounding)?)?;
        let off = offline.solve(oracle, &self.x.support(), self.k)?;
        if off.value > rounded.value {
            Ok(StreamOutput {
                set: off.set,
                value: off.value,
            })
        } else {
            Ok(rounded)
        }
    }
}

impl StreamProcessor for FractionalStream {
    fn process(&mut self, oracle: &Oracle, e: ElementId) -> Result<()> {
        FractionalStream::process(self, oracle, e)
    }

    fn stored_elements(&self) -> usize {
        self.stored()
    }
}

/// Geometric guesses for `τ` with granularity `ε'` over fractional streams.
///
/// The lower bound `m` is `max(f(∅), max_e f({e}))` over the prefix.
#[derive(Debug, Clone)]
pub struct ExtensionLadder {
    params: ExtensionParams,
    eps_prime: f64,
    k: usize,
    n: usize,
    m: f64,
    banks: BTreeMap<i32, FractionalStream>,
    created_at: BTreeMap<i32, usize>,
    arrivals: usize,
    trace: Option<Vec<TraceEvent>>,
    retired_violations: Vec<Violation>,
}

impl ExtensionLadder {
    /// `ε' = ε/8`, `p = ε/2`.
    pub fn for_epsilon(oracle: &Oracle, k: usize, epsilon: f64, alpha: f64, mode: DerivativeMode) -> Result<Self> {
        let params = ExtensionParams::for_epsilon(epsilon, alpha, mode)?;
        Self::new(oracle, k, params, epsilon / 8.0)
    }

    pub fn new(oracle: &Oracle, k: usize, params: ExtensionParams, eps_prime: f64) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidParameter("k must be >= 1".into()));
        }
        if !(eps_prime > 0.0 && eps_prime < 1.0) {
            return Err(Error::InvalidParameter(format!("eps_prime {eps_prime} not in (0, 1)")));
        }
        let m = oracle.evaluate(&[])?;
        let mut ladder = ExtensionLadder {
            params,
            eps_prime,
            k,
            n: oracle.n(),
            m,
            banks: BTreeMap::new(),
            created_at: BTreeMap::new(),
            arrivals: 0,
            trace: None,
            retired_violations: Vec::new(),
        };
        if let Some(range) = ladder.range() {
            for h in range {
                ladder.open_bank(h)?;
            }
        }
        Ok(ladder)
    }

    pub fn with_trace(mut self) -> Self {
        self.trace = Some(Vec::new());
        self
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn eps_prime(&self) -> f64 {
        self.eps_prime
    }

    pub fn banks(&self) -> &BTreeMap<i32, FractionalStream> {
        &self.banks
    }

    pub fn guesses(&self) -> Vec<f64> {
        self.banks.values().map(FractionalStream::tau).collect()
    }

    pub fn stored(&self) -> usize {
        self.banks.values().map(FractionalStream::stored).sum()
    }

    /// Violations from live banks and from banks dropped earlier.
    pub fn violations(&self) -> Vec<Violation> {
        let mut all = self.retired_violations.clone();
        for bank in self.banks.values() {
            all.extend(bank.violations().iter().cloned());
        }
        all
    }

    /// Ladder events followed by the per-bank audit lines.
    pub fn trace(&self) -> Option<Vec<TraceEvent>> {
        let mut all = self.trace.clone()?;
        for bank in self.banks.values() {
            all.extend(bank.trace().unwrap_or_default().iter().cloned());
        }
        Some(all)
    }

    fn range(&self) -> Option<std::ops::RangeInclusive<i32>> {
        guess_exponents(self.m, self.k, self.params.c(), self.eps_prime)
    }

    fn open_bank(&mut self, h: i32) -> Result<()> {
        let tau = (1.0 + self.eps_prime).powi(h);
        let mut bank = FractionalStream::new(self.n, tau, self.k, self.params)?;
        if self.trace.is_some() {
            bank = bank.with_trace();
        }
        self.banks.insert(h, bank);
        self.created_at.insert(h, self.arrivals);
        Ok(())
    }

    pub fn process(&mut self, oracle: &Oracle, e: ElementId) -> Result<()> {
        let singleton = oracle.evaluate(&[e])?;
        if singleton > self.m {
            self.m = singleton;
            let range = self.range();
            let removed: Vec<i32> = self
                .banks
                .keys()
                .copied()
                .filter(|h| !range.as_ref().is_some_and(|r| r.contains(h)))
                .collect();
            for h in &removed {
                if let Some(bank) = self.banks.remove(h) {
                    self.retired_violations.extend(bank.violations().iter().cloned());
                }
                self.created_at.remove(h);
            }
            let mut added = Vec::new();
            if let Some(range) = range {
                for h in range {
                    if !self.banks.contains_key(&h) {
                        self.open_bank(h)?;
                        added.push(h);
                    }
                }
            }
            if let Some(t) = self.trace.as_mut() {
                t.push(TraceEvent::Ladder {
                    element: e,
                    m: self.m,
                    added,
                    removed,
                });
            }
        }
        for bank in self.banks.values_mut() {
            bank.arrivals = self.arrivals;
            bank.process(oracle, e)?;
        }
        self.arrivals += 1;
        Ok(())
    }

    /// Replays `stream` through a fresh state for every live guess and
    /// reports guesses whose point differs.
    pub fn late_start_mismatches(&self, oracle: &Oracle, stream: &[ElementId]) -> Result<Vec<Violation>> {
        let mut out = Vec::new();
        for (&h, bank) in &self.banks {
            let mut fresh = FractionalStream::new(self.n, bank.tau(), self.k, self.params)?.without_checks();
            for &e in stream {
                fresh.process(oracle, e)?;
            }
            if fresh.point() != bank.point() {
                out.push(Violation {
                    invariant: LATE_START,
                    arrival: self.created_at.get(&h).copied().unwrap_or(0),
                    detail: format!("tau={} (h={h}) differs from a from-start replay", bank.tau()),
                });
            }
        }
        Ok(out)
    }

    /// Whether some live guess lies in `[(1-ε')·opt, opt]`.
    pub fn contains_estimate_for(&self, opt: f64) -> bool {
        let low = (1.0 - self.eps_prime) * opt;
        self.guesses()
            .iter()
            .any(|&t| t >= low - TOLERANCE && t <= opt + TOLERANCE)
    }

    pub fn finalize(
        &self,
        oracle: &Oracle,
        offline: &OfflineAlgorithm,
        rounding: RoundingMode,
    ) -> Result<StreamOutput> {
        let mut best: Option<StreamOutput> = None;
        for bank in self.banks.values() {
            let out = bank.finalize(oracle, offline, rounding)?;
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

impl StreamProcessor for ExtensionLadder {
    fn process(&mut self, oracle: &Oracle, e: ElementId) -> Result<()> {
        ExtensionLadder::process(self, oracle, e)
    }

    fn stored_elements(&self) -> usize {
        self.stored()
    }
}
