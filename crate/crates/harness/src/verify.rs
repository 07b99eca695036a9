//! The `verify` battery: each suite replays one module's invariants over a
//! fixed set of small fixtures and reports one line per check.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use substream_core::extensions::{lovasz, multilinear_exact, multilinear_sample, FractionalPoint};
use substream_core::offline::{brute_force, plain_greedy, random_greedy};
use substream_core::oracle::{find_diminishing_returns_violation, find_submodularity_violation, CheckMode, SquaredSize};
use substream_core::rounding::{pipage_round_deterministic, swap_round};
use substream_core::{ElementId, Oracle, TOLERANCE};

use crate::config::{Algorithm, RunConfig};
use crate::dataset::{load, Dataset};
use crate::error::{HarnessError, Result};
use crate::runner::{optimum, run_on};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Oracles,
    Extensions,
    Rounding,
    Offline,
    Threshold,
    ExtensionStream,
    Randomized,
    All,
}

impl Suite {
    pub const MODULES: [Suite; 7] = [
        Suite::Oracles,
        Suite::Extensions,
        Suite::Rounding,
        Suite::Offline,
        Suite::Threshold,
        Suite::ExtensionStream,
        Suite::Randomized,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Oracles => "oracles",
            Suite::Extensions => "extensions",
            Suite::Rounding => "rounding",
            Suite::Offline => "offline",
            Suite::Threshold => "threshold",
            Suite::ExtensionStream => "extension-stream",
            Suite::Randomized => "randomized",
            Suite::All => "all",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        Suite::MODULES
            .into_iter()
            .chain([Suite::All])
            .find(|m| m.name() == s)
            .ok_or_else(|| HarnessError::UnknownSuite(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub suite: Suite,
    pub check: &'static str,
    pub passed: bool,
    /// Fixture count on success, first failure otherwise.
    pub detail: String,
}

impl fmt::Display for CheckResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{status} suite={} check={} {}", self.suite, self.check, self.detail)
    }
}

const FIXTURES: [&str; 6] = [
    "random-cut:8:0.4:1",
    "random-cut:9:0.5:2",
    "random-dcut:8:0.4:3",
    "random-coverage:8:12:0.25:4",
    "modular:3:1:4:1:5:9:2:6",
    "hard:2:3",
];

/// The shipped fixtures, plus a supermodular one when `inject_fault` is set.
pub fn fixtures(inject_fault: bool) -> Result<Vec<Dataset>> {
    let mut out = FIXTURES
        .iter()
        .map(|r| load(r, std::path::Path::new(".")))
        .collect::<Result<Vec<_>>>()?;
    if inject_fault {
        out.push(Dataset {
            reference: "fault:squared-size:6".into(),
            oracle: Oracle::new(SquaredSize { n: 6 }),
            analytic_opt: None,
        });
    }
    Ok(out)
}

pub fn run_suite(suite: Suite, inject_fault: bool) -> Result<Vec<CheckResult>> {
    let fx = fixtures(inject_fault)?;
    let suites: Vec<Suite> = match suite {
        Suite::All => Suite::MODULES.to_vec(),
        s => vec![s],
    };
    let mut out = Vec::new();
    for s in suites {
        out.extend(match s {
            Suite::Oracles => oracles(&fx)?,
            Suite::Extensions => extensions(&fx)?,
            Suite::Rounding => rounding(&fx)?,
            Suite::Offline => offline(&fx)?,
            Suite::Threshold => streaming(&fx, Suite::Threshold)?,
            Suite::ExtensionStream => streaming(&fx, Suite::ExtensionStream)?,
            Suite::Randomized => streaming(&fx, Suite::Randomized)?,
            Suite::All => unreachable!("expanded above"),
        });
    }
    Ok(out)
}

/// Accumulates per-fixture outcomes of one named check.
struct Check {
    suite: Suite,
    name: &'static str,
    cases: usize,
    failure: Option<String>,
}

impl Check {
    fn new(suite: Suite, name: &'static str) -> Self {
        Check {
            suite,
            name,
            cases: 0,
            failure: None,
        }
    }

    fn record(&mut self, fixture: &str, ok: bool, detail: impl FnOnce() -> String) {
        self.cases += 1;
        if !ok && self.failure.is_none() {
            self.failure = Some(format!("fixture={fixture} {}", detail()));
        }
    }

    fn finish(self) -> CheckResult {
        CheckResult {
            suite: self.suite,
            check: self.name,
            passed: self.failure.is_none(),
            detail: self.failure.unwrap_or_else(|| format!("cases={}", self.cases)),
        }
    }
}

fn random_point(n: usize, rng: &mut ChaCha8Rng, zero_prob: f64) -> FractionalPoint {
    let dense: Vec<f64> = (0..n)
        .map(|_| if rng.gen_bool(zero_prob) { 0.0 } else { rng.gen::<f64>() })
        .collect();
    FractionalPoint::from_dense(&dense).expect("coordinates lie in [0, 1)")
}

fn oracles(fx: &[Dataset]) -> Result<Vec<CheckResult>> {
    let mut submod = Check::new(Suite::Oracles, "submodularity");
    let mut dr = Check::new(Suite::Oracles, "diminishing-returns");
    let mut nonneg = Check::new(Suite::Oracles, "non-negativity");
    for d in fx {
        let o = &d.oracle;
        let s = find_submodularity_violation(o, CheckMode::Exhaustive)?;
        submod.record(&d.reference, s.is_none(), || format!("{s:?}"));
        let v = find_diminishing_returns_violation(o)?;
        dr.record(&d.reference, v.is_none(), || {
            let v = v.as_ref().expect("present on failure");
            format!("e={} A={:?} B={:?} excess={}", v.element, v.a, v.b, v.excess)
        });
        let n = o.n();
        let mut min = f64::INFINITY;
        for mask in 0u64..1 << n {
            let set: Vec<ElementId> = (0..n).filter(|i| mask >> i & 1 == 1).map(ElementId).collect();
            min = min.min(o.evaluate(&set)?);
        }
        nonneg.record(&d.reference, min >= -TOLERANCE, || format!("min f = {min}"));
    }
    Ok(vec![submod.finish(), dr.finish(), nonneg.finish()])
}

fn extensions(fx: &[Dataset]) -> Result<Vec<CheckResult>> {
    let s = Suite::Extensions;
    let mut below = Check::new(s, "lovasz-below-multilinear");
    let mut homog = Check::new(s, "lovasz-scaling");
    let mut convex = Check::new(s, "lovasz-convexity");
    let mut disjoint = Check::new(s, "disjoint-sum-bound");
    let mut sampled = Check::new(s, "sampled-within-4-stderr");
    let mut rng = ChaCha8Rng::seed_from_u64(0xE7);
    for d in fx {
        let o = &d.oracle;
        let n = o.n();
        for _ in 0..8 {
            let x = random_point(n, &mut rng, 0.3);
            let y = random_point(n, &mut rng, 0.3);
            let fx_ = multilinear_exact(o, &x)?;
            let lx = lovasz(o, &x)?;
            below.record(&d.reference, lx <= fx_ + TOLERANCE, || format!("f^={lx} F={fx_}"));

            let c: f64 = rng.gen();
            let lcx = lovasz(o, &x.scaled(c)?)?;
            homog.record(&d.reference, lcx >= c * lx - TOLERANCE, || format!("f^(cx)={lcx} c*f^(x)={}", c * lx));

            let t: f64 = rng.gen();
            let mid = lovasz(o, &x.convex_combination(&y, t)?)?;
            let ly = lovasz(o, &y)?;
            let rhs = t * lx + (1.0 - t) * ly;
            convex.record(&d.reference, mid <= rhs + TOLERANCE, || format!("f^(mix)={mid} > {rhs}"));

            let p = 0.3;
            let mut xs = vec![0.0; n];
            let mut ys = vec![0.0; n];
            for i in 0..n {
                if rng.gen_bool(0.5) {
                    xs[i] = rng.gen();
                } else {
                    ys[i] = p * rng.gen::<f64>();
                }
            }
            let xa = FractionalPoint::from_dense(&xs)?;
            let ya = FractionalPoint::from_dense(&ys)?;
            let fa = multilinear_exact(o, &xa)?;
            let fsum = multilinear_exact(o, &xa.sum(&ya)?)?;
            disjoint.record(&d.reference, fsum >= (1.0 - p) * fa - TOLERANCE, || {
                format!("F(x+y)={fsum} < (1-p)F(x)={}", (1.0 - p) * fa)
            });

            let est = multilinear_sample(o, &x, 20_000, rng.gen())?;
            let ok = (est.mean - fx_).abs() <= 4.0 * est.stderr + TOLERANCE;
            sampled.record(&d.reference, ok, || format!("sampled={} exact={fx_} stderr={}", est.mean, est.stderr));
        }
    }
    Ok(vec![below.finish(), homog.finish(), convex.finish(), disjoint.finish(), sampled.finish()])
}

fn capped_point(n: usize, k: usize, rng: &mut ChaCha8Rng) -> Result<FractionalPoint> {
    let x = random_point(n, rng, 0.2);
    let mass = x.norm1();
    if mass > k as f64 {
        Ok(x.scaled(k as f64 / mass)?)
    } else {
        Ok(x)
    }
}

fn rounding(fx: &[Dataset]) -> Result<Vec<CheckResult>> {
    let s = Suite::Rounding;
    let mut size = Check::new(s, "swap-size-bound");
    let mut freq = Check::new(s, "swap-marginals");
    let mut pipage = Check::new(s, "pipage-no-loss");
    let mut rng = ChaCha8Rng::seed_from_u64(0x50);
    const SEEDS: u64 = 2_000;
    for d in fx {
        let o = &d.oracle;
        let n = o.n();
        for k in [2, 3] {
            let x = capped_point(n, k, &mut rng)?;
            let mut counts = vec![0u64; n];
            let mut max_len = 0;
            for seed in 0..SEEDS {
                let set = swap_round(&x, k, seed)?;
                max_len = max_len.max(set.len());
                for e in set {
                    counts[e.0] += 1;
                }
            }
            size.record(&d.reference, max_len <= k, || format!("|S|={max_len} > k={k}"));
            let worst = (0..n)
                .map(|i| {
                    let xe = x.get(ElementId(i));
                    let sd = (xe * (1.0 - xe) / SEEDS as f64).sqrt();
                    let dev = (counts[i] as f64 / SEEDS as f64 - xe).abs();
                    (dev - 5.0 * sd, i)
                })
                .fold((f64::NEG_INFINITY, 0), |a, b| if b.0 > a.0 { b } else { a });
            freq.record(&d.reference, worst.0 <= 1e-12, || format!("element {} off by more than 5 sigma", worst.1));

            let fxv = multilinear_exact(o, &x)?;
            let set = pipage_round_deterministic(o, &x, k)?;
            let fs = o.evaluate(&set)?;
            pipage.record(&d.reference, fs >= fxv - TOLERANCE && set.len() <= k, || {
                format!("f(S)={fs} F(x)={fxv} |S|={}", set.len())
            });
        }
    }
    Ok(vec![size.finish(), freq.finish(), pipage.finish()])
}

fn offline(fx: &[Dataset]) -> Result<Vec<CheckResult>> {
    let s = Suite::Offline;
    let mut exact = Check::new(s, "brute-force-optimal");
    let mut rg = Check::new(s, "random-greedy-mean");
    let mut feas = Check::new(s, "feasibility");
    for d in fx {
        let o = &d.oracle;
        let n = o.n();
        let ground: Vec<ElementId> = (0..n).map(ElementId).collect();
        for k in [2, 3] {
            let best = brute_force(o, &ground, k)?;
            let mut enumerated = f64::NEG_INFINITY;
            for mask in 0u64..1 << n {
                if (mask.count_ones() as usize) <= k {
                    let set: Vec<ElementId> = (0..n).filter(|i| mask >> i & 1 == 1).map(ElementId).collect();
                    enumerated = enumerated.max(o.evaluate(&set)?);
                }
            }
            exact.record(&d.reference, (best.value - enumerated).abs() <= TOLERANCE, || {
                format!("brute force {} vs enumeration {enumerated}", best.value)
            });

            let values = (0..200u64)
                .map(|seed| random_greedy(o, &ground, k, seed).map(|r| r.value))
                .collect::<std::result::Result<Vec<_>, _>>()?;
            let mean = values.iter().sum::<f64>() / values.len() as f64;
            let sd = (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (values.len() - 1) as f64).sqrt();
            let floor = best.value / std::f64::consts::E - 3.0 * sd / (values.len() as f64).sqrt();
            rg.record(&d.reference, mean >= floor - TOLERANCE, || format!("mean={mean} < {floor}"));

            let g = plain_greedy(o, &ground, k)?;
            feas.record(&d.reference, g.set.len() <= k && best.set.len() <= k, || "oversized output".into());
        }
    }
    Ok(vec![exact.finish(), rg.finish(), feas.finish()])
}

/// Runs the streaming algorithms of one suite through the runner, which
/// performs every invariant audit, and checks the approximation floor.
fn streaming(fx: &[Dataset], suite: Suite) -> Result<Vec<CheckResult>> {
    let (algorithms, epsilon, floor): (&[Algorithm], f64, f64) = match suite {
        Suite::Threshold => (&[Algorithm::Threshold, Algorithm::ThresholdKnownTau], 0.2, 0.3),
        Suite::ExtensionStream => (&[Algorithm::Extension, Algorithm::ExtensionKnownTau], 0.4, 0.1),
        _ => (&[Algorithm::RandomizedKnownTau, Algorithm::Randomized], 0.25, 0.0),
    };
    let mut inv = Check::new(suite, "invariants");
    let mut ratio = Check::new(suite, "approximation-floor");
    for d in fx {
        // A fixture that is not submodular would trip guarantees that assume
        // it is; it belongs to the oracles suite only.
        if find_submodularity_violation(&d.oracle, CheckMode::Exhaustive)?.is_some() {
            continue;
        }
        let opt = optimum(d, 3)?.map(|o| o.value).unwrap_or(0.0);
        for &alg in algorithms {
            for seed in 0..3u64 {
                let mut cfg = RunConfig::new(alg, d.reference.clone(), 3);
                cfg.epsilon = epsilon;
                cfg.seed = seed;
                cfg.order = crate::config::Order::Shuffle(seed);
                let r = run_on(&cfg, d, false)?.report;
                inv.record(&d.reference, r.violations == 0, || {
                    format!("algorithm={alg} seed={seed} {}", r.violation_details.join("; "))
                });
                if floor > 0.0 {
                    ratio.record(&d.reference, r.value >= floor * opt - TOLERANCE, || {
                        format!("algorithm={alg} seed={seed} value={} opt={opt}", r.value)
                    });
                }
            }
        }
    }
    let mut out = vec![inv.finish()];
    if floor > 0.0 {
        out.push(ratio.finish());
    }
    Ok(out)
}
