//! Executes one [`RunConfig`] and assembles its [`RunReport`].
//!
//! The algorithm runs against its own oracle so the reported call count is
//! exactly that oracle's counter. The optimum and every post-run audit use
//! separate oracles over the same function.

use std::path::Path;
use std::time::Instant;

use substream_core::extension_stream::{ExtensionLadder, ExtensionParams, FractionalStream};
use substream_core::extensions::DerivativeMode;
use substream_core::offline::{brute_force, subsets_up_to, OfflineAlgorithm, DEFAULT_BRUTE_FORCE_CAP};
use substream_core::randomized::{rho_for, RandomizedConfig, RandomizedLadder, RandomizedState};
use substream_core::threshold::{SolutionBank, ThresholdConfig};
use substream_core::{
    run_stream, ElementId, Oracle, StreamOutput, StreamProcessor, StreamStats, TraceEvent, Violation,
};

use crate::config::{Algorithm, RunConfig};
use crate::dataset::{build_stream, load, Dataset};
use crate::error::{HarnessError, Result};
use crate::report::{OptSource, RunReport};

/// Constant in the reported space budget.
pub const BUDGET_CONSTANT: f64 = 8.0;

pub struct RunOutcome {
    pub report: RunReport,
    pub trace: Vec<String>,
    /// The oracle the algorithm ran against.
    pub oracle: Oracle,
}

/// Optimum of a dataset, if known analytically or within the brute-force cap.
#[derive(Debug, Clone, PartialEq)]
pub struct Optimum {
    pub value: f64,
    pub set: Option<Vec<ElementId>>,
    pub source: OptSource,
}

pub fn optimum(dataset: &Dataset, k: usize) -> Result<Option<Optimum>> {
    let oracle = dataset.oracle.fresh();
    let n = oracle.n();
    if subsets_up_to(n, k) <= DEFAULT_BRUTE_FORCE_CAP {
        let ground: Vec<ElementId> = (0..n).map(ElementId).collect();
        let r = brute_force(&oracle, &ground, k)?;
        return Ok(Some(Optimum {
            value: r.value,
            set: Some(r.set),
            source: OptSource::BruteForce,
        }));
    }
    Ok(dataset.analytic_opt.map(|value| Optimum {
        value,
        set: None,
        source: OptSource::Analytic,
    }))
}

pub fn run(cfg: &RunConfig, base: &Path, trace: bool) -> Result<RunOutcome> {
    let dataset = load(&cfg.dataset, base)?;
    run_on(cfg, &dataset, trace)
}

/// What an algorithm hands back before the report is assembled.
struct Finished {
    output: StreamOutput,
    stats: StreamStats,
    per_element: bool,
    tau: Option<f64>,
    space_budget: Option<f64>,
    violations: Vec<String>,
    trace: Vec<String>,
}

pub fn run_on(cfg: &RunConfig, dataset: &Dataset, trace: bool) -> Result<RunOutcome> {
    let oracle = dataset.oracle.fresh();
    let audit = dataset.oracle.fresh();
    let n = oracle.n();
    let stream = build_stream(n, cfg.order, cfg.limit);
    let opt = optimum(dataset, cfg.k)?;
    let alpha = cfg.alpha();
    let offline = cfg.offline.build(cfg.seed);

    let estimate = |name: &'static str| -> Result<f64> {
        match (cfg.tau, &opt) {
            (Some(t), _) => Ok(t),
            (None, Some(o)) => Ok(cfg.tau_factor() * o.value),
            (None, None) => Err(HarnessError::OptUnavailable(name)),
        }
    };
    let mode = cfg.derivative_mode.resolve(n, cfg.samples, cfg.seed);

    let start = Instant::now();
    let fin = match cfg.algorithm {
        Algorithm::Threshold => {
            let tcfg = threshold_config(cfg, alpha)?;
            let mut ladder = substream_core::threshold::GuessLadder::new(&oracle, cfg.k, tcfg)?;
            if trace {
                ladder = ladder.with_trace();
            }
            let stats = run_stream(&mut ladder, &oracle, &stream)?;
            let output = ladder.finalize(&oracle, &offline)?;
            let mut v: Vec<Violation> = ladder.violations().to_vec();
            v.extend(ladder.late_start_mismatches(&audit, &stream)?);
            v.extend(ladder.audit_admissions(&audit)?);
            Finished {
                output,
                stats,
                per_element: true,
                tau: None,
                space_budget: Some(ladder.stored_budget(BUDGET_CONSTANT)),
                violations: strings(&v),
                trace: lines(ladder.trace().unwrap_or_default()),
            }
        }
        Algorithm::ThresholdKnownTau => {
            let tau = estimate("threshold-known-tau")?;
            let tcfg = threshold_config(cfg, alpha)?;
            let mut bank = TracedBank {
                bank: SolutionBank::for_estimate(&oracle, tau, cfg.k, &tcfg)?,
                trace: Vec::new(),
            };
            let stats = run_stream(&mut bank, &oracle, &stream)?;
            let output = bank.bank.finalize(&oracle, &offline)?;
            let mut v = Vec::new();
            bank.bank.check_bounds(None, stream.len(), &mut v);
            bank.bank.check_disjoint(stream.len(), &mut v);
            v.extend(bank.bank.audit_admissions(&audit)?);
            Finished {
                output,
                stats,
                per_element: true,
                tau: Some(tau),
                space_budget: None,
                violations: strings(&v),
                trace: if trace { lines(&bank.trace) } else { Vec::new() },
            }
        }
        Algorithm::Extension => {
            let params = extension_params(cfg, alpha, mode)?;
            let eps_prime = cfg.eps_prime.unwrap_or(cfg.epsilon / 8.0);
            let mut ladder = ExtensionLadder::new(&oracle, cfg.k, params, eps_prime)?;
            if trace {
                ladder = ladder.with_trace();
            }
            let stats = run_stream(&mut ladder, &oracle, &stream)?;
            let output = ladder.finalize(&oracle, &offline, cfg.rounding.build(cfg.seed))?;
            let mut v = ladder.violations();
            if mode == DerivativeMode::Exact {
                v.extend(ladder.late_start_mismatches(&audit, &stream)?);
            }
            Finished {
                output,
                stats,
                per_element: true,
                tau: None,
                space_budget: None,
                violations: strings(&v),
                trace: lines(&ladder.trace().unwrap_or_default()),
            }
        }
        Algorithm::ExtensionKnownTau => {
            let tau = estimate("extension-known-tau")?;
            let params = extension_params(cfg, alpha, mode)?;
            let mut s = FractionalStream::new(n, tau, cfg.k, params)?;
            if trace {
                s = s.with_trace();
            }
            let stats = run_stream(&mut s, &oracle, &stream)?;
            let output = s.finalize(&oracle, &offline, cfg.rounding.build(cfg.seed))?;
            let mut v = s.violations().to_vec();
            if mode == DerivativeMode::Exact {
                v.extend(s.final_rejection_violations(&audit)?);
                if let Some(opt_set) = opt.as_ref().and_then(|o| o.set.as_ref()) {
                    if let Some((lhs, rhs)) = s.opt_completion_gap(&audit, opt_set)? {
                        if lhs > rhs + substream_core::TOLERANCE {
                            v.push(Violation {
                                invariant: substream_core::extension_stream::OPT_GAP,
                                arrival: stream.len(),
                                detail: format!("F(x + 1_(OPT - supp)) = {lhs} > F(x) + b*c*tau = {rhs}"),
                            });
                        }
                    }
                }
            }
            Finished {
                output,
                stats,
                per_element: true,
                tau: Some(tau),
                space_budget: None,
                violations: strings(&v),
                trace: lines(s.trace().unwrap_or_default()),
            }
        }
        Algorithm::Randomized => {
            let rcfg = RandomizedConfig::with_c_r(cfg.epsilon, cfg.c_r, cfg.seed)?;
            let mut ladder = RandomizedLadder::new(&oracle, cfg.k, alpha, rcfg)?;
            if trace {
                ladder = ladder.with_trace();
            }
            let stats = run_stream(&mut ladder, &oracle, &stream)?;
            let output = ladder.finalize(&oracle, &offline)?;
            let mut v = strings(&ladder.violations());
            for h in ladder.late_start_mismatches(&audit, &stream)? {
                v.push(format!(
                    "invariant={} guess exponent {h} differs from a from-start replay",
                    substream_core::threshold::LATE_START
                ));
            }
            Finished {
                output,
                stats,
                per_element: true,
                tau: None,
                space_budget: None,
                violations: v,
                trace: lines(&ladder.trace().unwrap_or_default()),
            }
        }
        Algorithm::RandomizedKnownTau => {
            let tau = estimate("randomized-known-tau")?;
            let rcfg = RandomizedConfig::with_c_r(cfg.epsilon, cfg.c_r, cfg.seed)?;
            let mut s = RandomizedState::new(&oracle, cfg.k, rho_for(alpha, tau, cfg.k), &rcfg)?;
            if trace {
                s = s.with_trace();
            }
            let stats = run_stream(&mut s, &oracle, &stream)?;
            let output = s.post_process(&oracle, &offline)?;
            Finished {
                output,
                stats,
                per_element: true,
                tau: Some(tau),
                space_budget: None,
                violations: strings(s.violations()),
                trace: lines(s.trace().unwrap_or_default()),
            }
        }
        Algorithm::Greedy | Algorithm::RandomGreedy | Algorithm::BruteForce => {
            let alg = match cfg.algorithm {
                Algorithm::Greedy => OfflineAlgorithm::Greedy,
                Algorithm::RandomGreedy => OfflineAlgorithm::RandomGreedy { seed: cfg.seed },
                _ => OfflineAlgorithm::brute_force(),
            };
            let r = alg.solve(&oracle, &stream, cfg.k)?;
            Finished {
                output: StreamOutput {
                    set: r.set,
                    value: r.value,
                },
                stats: StreamStats {
                    elements: stream.len(),
                    peak_stored: stream.len(),
                    max_calls_per_element: 0,
                },
                per_element: false,
                tau: None,
                space_budget: None,
                violations: Vec::new(),
                trace: Vec::new(),
            }
        }
    };
    let wall_time_ms = start.elapsed().as_secs_f64() * 1e3;

    let mut violations = fin.violations;
    if fin.output.set.len() > cfg.k {
        violations.push(format!("invariant=feasibility |S|={} > k={}", fin.output.set.len(), cfg.k));
    }
    let ratio = opt.as_ref().map(|o| ratio(fin.output.value, o.value));
    if let Some(r) = ratio {
        if r > 1.0 + substream_core::TOLERANCE {
            violations.push(format!("invariant=ratio-bound ratio={r} > 1"));
        }
    }
    let report = RunReport {
        algorithm: cfg.algorithm.to_string(),
        dataset: cfg.dataset.clone(),
        config: cfg.clone(),
        n,
        stream_length: stream.len(),
        k: cfg.k,
        seed: cfg.seed,
        alpha,
        tau: fin.tau,
        set: fin.output.set.iter().map(|e| e.0).collect(),
        value: fin.output.value,
        opt: opt.as_ref().map(|o| o.value),
        opt_source: opt.as_ref().map(|o| o.source),
        ratio,
        peak_stored: fin.stats.peak_stored,
        space_budget: fin.space_budget,
        oracle_calls: oracle.calls(),
        max_calls_per_element: fin.per_element.then_some(fin.stats.max_calls_per_element),
        violations: violations.len(),
        violation_details: violations,
        wall_time_ms,
    };
    Ok(RunOutcome {
        report,
        trace: fin.trace,
        oracle,
    })
}

/// `value / opt`, with `0/0 = 1`.
fn ratio(value: f64, opt: f64) -> f64 {
    if opt > 0.0 {
        value / opt
    } else {
        1.0
    }
}

fn threshold_config(cfg: &RunConfig, alpha: f64) -> Result<ThresholdConfig> {
    let mut t = ThresholdConfig::new(cfg.epsilon, alpha)?;
    if let Some(p) = cfg.p {
        if p.fract() != 0.0 || p < 1.0 {
            return Err(HarnessError::Config {
                line: 0,
                message: format!("threshold algorithms need an integer p >= 1, got {p}"),
            });
        }
        t = t.with_p(p as usize)?;
    }
    if let Some(e) = cfg.eps_prime {
        t = t.with_eps_prime(e)?;
    }
    Ok(t)
}

fn extension_params(cfg: &RunConfig, alpha: f64, mode: DerivativeMode) -> Result<ExtensionParams> {
    Ok(match cfg.p {
        Some(p) => ExtensionParams::new(alpha, p, mode)?,
        None => ExtensionParams::for_epsilon(cfg.epsilon, alpha, mode)?,
    })
}

fn strings(v: &[Violation]) -> Vec<String> {
    v.iter().map(ToString::to_string).collect()
}

fn lines(events: &[TraceEvent]) -> Vec<String> {
    events.iter().map(ToString::to_string).collect()
}

/// A known-estimate bank that records its admissions as trace events.
struct TracedBank {
    bank: SolutionBank,
    trace: Vec<TraceEvent>,
}

impl StreamProcessor for TracedBank {
    fn process(&mut self, oracle: &Oracle, e: ElementId) -> substream_core::Result<()> {
        if let Some(adm) = self.bank.process(oracle, e)? {
            self.trace.push(TraceEvent::Accept {
                element: e,
                tau: self.bank.tau(),
                slot: adm.slot,
                gain: adm.gain,
            });
        }
        Ok(())
    }

    fn stored_elements(&self) -> usize {
        self.bank.stored()
    }
}
