//! Acceptance gate. Runs every criterion at its stated tolerance, prints one
//! `PASS`/`FAIL` line per criterion, and exits non-zero if any failed.
//!
//! Seeds and instance lists are fixed here, before any result is seen.

use std::io::Write;
use std::path::Path;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use substream_core::extensions::{lovasz, multilinear_exact, multilinear_sample, FractionalPoint};
use substream_core::oracle::{make_random_coverage, make_random_cut};
use substream_core::rounding::{pipage_round_deterministic, swap_round};
use substream_core::{ElementId, Oracle};
use substream_harness::config::{DerivativeChoice, OfflineChoice, Order, RoundingChoice};
use substream_harness::dataset::{load, Dataset};
use substream_harness::sweep::sweep;
use substream_harness::{optimum, run_on, Algorithm, RunConfig, RunReport};

const TOL: f64 = 1e-9;

struct Verdict {
    passed: bool,
    summary: String,
    failures: Vec<String>,
}

impl Verdict {
    fn new(failures: Vec<String>, summary: String) -> Self {
        Verdict {
            passed: failures.is_empty(),
            summary,
            failures,
        }
    }
}

struct Instance {
    dataset: Dataset,
    k: usize,
    opt: f64,
}

fn instance(reference: &str, k: usize) -> Instance {
    let dataset = load(reference, Path::new(".")).unwrap();
    let opt = optimum(&dataset, k).unwrap().expect("within the brute-force cap").value;
    Instance { dataset, k, opt }
}

/// Fifty seeded cut instances (half directed) with n in 8..=14 and k cycling
/// through 2, 3, 4, then the hard instance with k = 3, h = 9.
fn guarantee_instances() -> Vec<Instance> {
    let mut refs: Vec<(String, usize)> = (0..50)
        .map(|i| {
            let n = 8 + i % 7;
            let kind = if i % 2 == 0 { "random-cut" } else { "random-dcut" };
            (format!("{kind}:{n}:0.4:{}", 1000 + i), [2, 3, 4][i % 3])
        })
        .collect();
    refs.push(("hard:3:9".into(), 3));
    refs.par_iter().map(|(r, k)| instance(r, *k)).collect()
}

/// Instances with n <= max_n, cycling k through `ks`.
fn small_instances(count: usize, max_n: usize, ks: &[usize], seed_base: usize) -> Vec<Instance> {
    (0..count)
        .into_par_iter()
        .map(|i| {
            let n = 6 + i % (max_n - 5);
            let kind = if i % 2 == 0 { "random-cut" } else { "random-dcut" };
            instance(&format!("{kind}:{n}:0.4:{}", seed_base + i), ks[i % ks.len()])
        })
        .collect()
}

fn config(alg: Algorithm, inst: &Instance, epsilon: f64) -> RunConfig {
    let mut c = RunConfig::new(alg, inst.dataset.reference.clone(), inst.k);
    c.epsilon = epsilon;
    c
}

fn run(cfg: &RunConfig, inst: &Instance) -> RunReport {
    run_on(cfg, &inst.dataset, false).unwrap().report
}

fn mean_sd(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

fn below_floor(r: &RunReport, floor: f64, opt: f64) -> Option<String> {
    (r.value < floor * opt - TOL).then(|| {
        format!(
            "{} on {} (k={}): value {} < {floor}*OPT = {}",
            r.algorithm,
            r.dataset,
            r.k,
            r.value,
            floor * opt
        )
    })
}

fn min_ratio(reports: &[RunReport]) -> f64 {
    reports.iter().filter_map(|r| r.ratio).fold(f64::INFINITY, f64::min)
}

fn criterion_1(instances: &[Instance]) -> (Verdict, Vec<RunReport>) {
    let reports: Vec<RunReport> = instances
        .par_iter()
        .map(|inst| run(&config(Algorithm::Threshold, inst, 0.2), inst))
        .collect();
    let failures = reports
        .iter()
        .zip(instances)
        .filter_map(|(r, i)| below_floor(r, 0.3, i.opt))
        .collect();
    let summary = format!("{} instances, min ratio {:.4} (floor 0.3)", reports.len(), min_ratio(&reports));
    (Verdict::new(failures, summary), reports)
}

fn criterion_2(instances: &[Instance]) -> (Verdict, Vec<RunReport>) {
    let exact: Vec<RunReport> = instances
        .par_iter()
        .map(|inst| run(&config(Algorithm::ThresholdKnownTau, inst, 0.2), inst))
        .collect();
    let mut failures: Vec<String> = exact
        .iter()
        .zip(instances)
        .filter_map(|(r, i)| below_floor(r, 0.3, i.opt))
        .collect();

    let floor = 0.269 - 0.2;
    let randomized: Vec<(Vec<RunReport>, f64)> = instances
        .par_iter()
        .map(|inst| {
            let reports: Vec<RunReport> = (0..100u64)
                .map(|seed| {
                    let mut c = config(Algorithm::ThresholdKnownTau, inst, 0.2);
                    c.offline = OfflineChoice::RandomGreedy;
                    c.seed = seed;
                    run(&c, inst)
                })
                .collect();
            (reports, inst.opt)
        })
        .collect();
    let mut worst_margin = f64::INFINITY;
    for (reports, opt) in &randomized {
        let values: Vec<f64> = reports.iter().map(|r| r.value).collect();
        let (mean, sd) = mean_sd(&values);
        let bound = floor * opt - 3.0 * sd;
        worst_margin = worst_margin.min(mean - bound);
        if mean < bound - TOL {
            failures.push(format!("{}: random-greedy mean {mean} < {bound}", reports[0].dataset));
        }
    }
    let summary = format!(
        "brute-force offline min ratio {:.4} (floor 0.3); random-greedy offline worst mean-minus-bound {:.4} over 100 seeds",
        min_ratio(&exact),
        worst_margin
    );
    let mut all = exact;
    all.extend(randomized.into_iter().flat_map(|(r, _)| r));
    (Verdict::new(failures, summary), all)
}

fn criterion_3(reports: &[RunReport]) -> Verdict {
    let failures: Vec<String> = reports
        .iter()
        .flat_map(|r| r.violation_details.iter().map(move |v| format!("{} on {}: {v}", r.algorithm, r.dataset)))
        .collect();
    Verdict::new(failures, format!("{} audited runs, 0 violations expected", reports.len()))
}

fn criterion_4() -> Verdict {
    let instances = small_instances(30, 12, &[2, 3, 4], 4000);
    let reports: Vec<RunReport> = instances
        .par_iter()
        .map(|inst| {
            let mut c = config(Algorithm::ExtensionKnownTau, inst, 0.4);
            c.p = Some(0.2);
            c.derivative_mode = DerivativeChoice::Exact;
            c.rounding = RoundingChoice::Pipage;
            run(&c, inst)
        })
        .collect();
    let mut failures: Vec<String> = reports
        .iter()
        .zip(&instances)
        .filter_map(|(r, i)| below_floor(r, 0.1, i.opt))
        .collect();
    failures.extend(
        reports
            .iter()
            .flat_map(|r| r.violation_details.iter().map(move |v| format!("{}: {v}", r.dataset))),
    );
    let summary = format!("{} instances, min ratio {:.4} (floor 0.1), structure and support audited", reports.len(), min_ratio(&reports));
    Verdict::new(failures, summary)
}

fn criterion_5() -> Verdict {
    let instances = small_instances(10, 12, &[2, 3], 5000);
    let floor = 0.5 - 3.0 * 0.25;
    let results: Vec<(String, f64, f64, f64, Vec<String>)> = instances
        .par_iter()
        .map(|inst| {
            let reports: Vec<RunReport> = (0..300u64)
                .map(|seed| {
                    let mut c = config(Algorithm::RandomizedKnownTau, inst, 0.25);
                    c.tau_factor = Some(1.0);
                    c.c_r = 2.0;
                    c.seed = seed;
                    run(&c, inst)
                })
                .collect();
            let values: Vec<f64> = reports.iter().map(|r| r.value).collect();
            let (mean, sd) = mean_sd(&values);
            let violations = reports.iter().flat_map(|r| r.violation_details.clone()).collect();
            (inst.dataset.reference.clone(), inst.opt, mean, sd, violations)
        })
        .collect();
    let mut failures = Vec::new();
    let mut worst = f64::INFINITY;
    for (name, opt, mean, sd, violations) in &results {
        let bound = floor * opt - 3.0 * sd;
        if mean < &(bound - TOL) {
            failures.push(format!("{name}: mean {mean} < {bound}"));
        }
        worst = worst.min(mean / opt);
        failures.extend(violations.iter().map(|v| format!("{name}: {v}")));
    }
    Verdict::new(
        failures,
        format!("{} instances x 300 seeds, worst mean ratio {worst:.4}, no cell-bound violations", results.len()),
    )
}

fn random_oracle(rng: &mut ChaCha8Rng) -> Oracle {
    let n = rng.gen_range(3..=10);
    let seed = rng.gen();
    match rng.gen_range(0..3) {
        0 => Oracle::new(make_random_cut(n, 0.5, false, seed).unwrap()),
        1 => Oracle::new(make_random_cut(n, 0.5, true, seed).unwrap()),
        _ => Oracle::new(make_random_coverage(n, 12, 0.3, seed).unwrap()),
    }
}

fn random_point(n: usize, rng: &mut ChaCha8Rng) -> FractionalPoint {
    let v: Vec<f64> = (0..n).map(|_| if rng.gen_bool(0.2) { 0.0 } else { rng.gen() }).collect();
    FractionalPoint::from_dense(&v).unwrap()
}

fn criterion_6() -> Verdict {
    let p = 0.25;
    let failures: Vec<String> = (0..200u64)
        .into_par_iter()
        .flat_map_iter(|pair| {
            let mut rng = ChaCha8Rng::seed_from_u64(0xC6_0000 + pair);
            let o = random_oracle(&mut rng);
            let n = o.n();
            let x = random_point(n, &mut rng);
            let y = random_point(n, &mut rng);
            let mut out = Vec::new();
            let f = multilinear_exact(&o, &x).unwrap();
            let l = lovasz(&o, &x).unwrap();
            if l > f + TOL {
                out.push(format!("pair {pair}: f^(x)={l} > F(x)={f}"));
            }
            let c: f64 = rng.gen();
            let lc = lovasz(&o, &x.scaled(c).unwrap()).unwrap();
            if lc < c * l - TOL {
                out.push(format!("pair {pair}: f^(cx)={lc} < c f^(x)={}", c * l));
            }
            let t: f64 = rng.gen();
            let mix = lovasz(&o, &x.convex_combination(&y, t).unwrap()).unwrap();
            let rhs = t * l + (1.0 - t) * lovasz(&o, &y).unwrap();
            if mix > rhs + TOL {
                out.push(format!("pair {pair}: convexity {mix} > {rhs}"));
            }
            let (mut xs, mut ys) = (vec![0.0; n], vec![0.0; n]);
            for i in 0..n {
                if rng.gen_bool(0.5) {
                    xs[i] = x.get(ElementId(i));
                } else {
                    ys[i] = p * rng.gen::<f64>();
                }
            }
            let xa = FractionalPoint::from_dense(&xs).unwrap();
            let ya = FractionalPoint::from_dense(&ys).unwrap();
            let fa = multilinear_exact(&o, &xa).unwrap();
            let fsum = multilinear_exact(&o, &xa.sum(&ya).unwrap()).unwrap();
            if fsum < (1.0 - p) * fa - TOL {
                out.push(format!("pair {pair}: F(x+y)={fsum} < (1-p)F(x)={}", (1.0 - p) * fa));
            }
            let est = multilinear_sample(&o, &x, 100_000, rng.gen()).unwrap();
            if (est.mean - f).abs() > 3.0 * est.stderr + TOL {
                out.push(format!(
                    "pair {pair}: sampled F {} vs exact {f} is {:.2} stderr away",
                    est.mean,
                    (est.mean - f).abs() / est.stderr
                ));
            }
            out
        })
        .collect();
    Verdict::new(failures, "200 (oracle, x) pairs, sampled F at 1e5 samples within 3 stderr".into())
}

fn criterion_7() -> Verdict {
    const SEEDS: u64 = 10_000;
    let failures: Vec<String> = (0..20u64)
        .into_par_iter()
        .flat_map_iter(|point| {
            let mut rng = ChaCha8Rng::seed_from_u64(0xC7_0000 + point);
            let o = random_oracle(&mut rng);
            let n = o.n();
            let k = rng.gen_range(1..=n.min(4));
            let mut x = random_point(n, &mut rng);
            if x.norm1() > k as f64 {
                x = x.scaled(k as f64 / x.norm1()).unwrap();
            }
            let mut out = Vec::new();
            let mut counts = vec![0u64; n];
            for seed in 0..SEEDS {
                let s = swap_round(&x, k, seed).unwrap();
                if s.len() > k {
                    out.push(format!("point {point} seed {seed}: |S|={} > k={k}", s.len()));
                }
                for e in s {
                    counts[e.0] += 1;
                }
            }
            for (i, &c) in counts.iter().enumerate() {
                let xe = x.get(ElementId(i));
                let sd = (xe * (1.0 - xe) / SEEDS as f64).sqrt();
                let freq = c as f64 / SEEDS as f64;
                if (freq - xe).abs() > 4.0 * sd + 1e-12 {
                    out.push(format!("point {point} element {i}: frequency {freq} vs x_e {xe} (4 sigma = {})", 4.0 * sd));
                }
            }
            let fx = multilinear_exact(&o, &x).unwrap();
            let s = pipage_round_deterministic(&o, &x, k).unwrap();
            let fs = o.evaluate(&s).unwrap();
            if fs < fx - TOL || s.len() > k {
                out.push(format!("point {point}: pipage f(S)={fs} < F(x)={fx} or |S|={} > {k}", s.len()));
            }
            out
        })
        .collect();
    Verdict::new(failures, "20 points x 1e4 seeds, 4-sigma marginals, pipage never below F(x)".into())
}

fn criterion_8() -> Verdict {
    let inst = instance("hard:3:50", 3);
    let analytic = inst.dataset.analytic_opt.expect("hard instance has a closed-form optimum");
    let mut c = config(Algorithm::Threshold, &inst, 0.1);
    c.order = Order::File;
    let r = run(&c, &inst);
    let ratio = r.value / analytic;
    let budget = r.space_budget.expect("ladder reports its budget");
    let mut failures = Vec::new();
    if !(0.4 - TOL..=1.0 + TOL).contains(&ratio) {
        failures.push(format!("ratio {ratio} outside [0.4, 1]"));
    }
    if r.peak_stored as f64 > budget {
        failures.push(format!("peak stored {} > budget {budget}", r.peak_stored));
    }
    if (inst.opt - analytic).abs() > TOL {
        failures.push(format!("brute-force OPT {} differs from 2k-1 = {analytic}", inst.opt));
    }
    failures.extend(r.violation_details.iter().cloned());
    Verdict::new(
        failures,
        format!(
            "k=3 h=50 w last: value {} / analytic OPT {analytic} = {ratio:.4}, peak stored {} <= budget {budget:.0}",
            r.value, r.peak_stored
        ),
    )
}

fn criterion_9() -> Verdict {
    let grid: Vec<RunConfig> = [0.4, 0.2, 0.1]
        .into_iter()
        .map(|eps| {
            let mut c = RunConfig::new(Algorithm::Threshold, "random-cut:60:0.2:17", 4);
            c.epsilon = eps;
            c
        })
        .collect();
    let res = sweep(&grid, Path::new(".")).unwrap();
    let peaks: Vec<usize> = res.reports.iter().map(|r| r.peak_stored).collect();
    let budgets: Vec<f64> = res.reports.iter().map(|r| r.space_budget.unwrap()).collect();
    let mut failures = Vec::new();
    // Grid order is eps = 0.4, 0.2, 0.1, so peaks must be non-decreasing along it.
    if peaks.windows(2).any(|w| w[0] > w[1]) {
        failures.push(format!("peaks {peaks:?} for eps 0.4, 0.2, 0.1 are not monotone"));
    }
    for (r, b) in res.reports.iter().zip(&budgets) {
        if r.peak_stored as f64 > *b {
            failures.push(format!("eps {}: peak {} > budget {b}", r.config.epsilon, r.peak_stored));
        }
        failures.extend(r.violation_details.iter().cloned());
    }
    let detail = res
        .reports
        .iter()
        .zip(&budgets)
        .map(|(r, b)| format!("eps={} peak={} budget={b:.0}", r.config.epsilon, r.peak_stored))
        .collect::<Vec<_>>()
        .join(", ");
    Verdict::new(failures, detail)
}

fn criterion_10(instances: &[Instance], first: &[RunReport]) -> Verdict {
    let (_, again) = criterion_1(instances);
    let failures = first
        .iter()
        .zip(&again)
        .filter(|(a, b)| a.without_wall_time() != b.without_wall_time())
        .map(|(a, _)| format!("{} differs between runs", a.dataset))
        .collect();
    Verdict::new(failures, format!("{} criterion-1 runs repeated, reports identical modulo wall time", again.len()))
}

fn report(out: &mut impl Write, id: usize, title: &str, start: Instant, v: &Verdict) -> bool {
    let status = if v.passed { "PASS" } else { "FAIL" };
    writeln!(
        out,
        "{status} criterion {id:>2} {title}: {} [{:.1}s]",
        v.summary,
        start.elapsed().as_secs_f64()
    )
    .unwrap();
    for f in v.failures.iter().take(10) {
        writeln!(out, "       {f}").unwrap();
    }
    if v.failures.len() > 10 {
        writeln!(out, "       ... {} more", v.failures.len() - 10).unwrap();
    }
    out.flush().unwrap();
    v.passed
}

fn main() {
    let mut out = std::io::stdout();
    let mut passed = Vec::new();

    let t = Instant::now();
    let instances = guarantee_instances();
    let (v1, r1) = criterion_1(&instances);
    passed.push(report(&mut out, 1, "threshold ladder, exact offline, eps=0.2", t, &v1));

    let t = Instant::now();
    let (v2, r2) = criterion_2(&instances);
    passed.push(report(&mut out, 2, "known estimate, eps=0.2", t, &v2));

    let t = Instant::now();
    let audited: Vec<RunReport> = r1.iter().chain(&r2).cloned().collect();
    passed.push(report(&mut out, 3, "threshold invariant suites", t, &criterion_3(&audited)));

    let t = Instant::now();
    passed.push(report(&mut out, 4, "fractional variant, exact derivatives, eps=0.4", t, &criterion_4()));

    let t = Instant::now();
    passed.push(report(&mut out, 5, "randomized grid, eps=0.25", t, &criterion_5()));

    let t = Instant::now();
    passed.push(report(&mut out, 6, "extension inequalities", t, &criterion_6()));

    let t = Instant::now();
    passed.push(report(&mut out, 7, "rounding", t, &criterion_7()));

    let t = Instant::now();
    passed.push(report(&mut out, 8, "hard instance", t, &criterion_8()));

    let t = Instant::now();
    passed.push(report(&mut out, 9, "space scaling in eps", t, &criterion_9()));

    let t = Instant::now();
    passed.push(report(&mut out, 10, "determinism", t, &criterion_10(&instances, &r1)));

    let failed = passed.iter().filter(|p| !**p).count();
    writeln!(out, "acceptance: {} of {} criteria passed", passed.len() - failed, passed.len()).unwrap();
    if failed > 0 {
        std::process::exit(1);
    }
}
