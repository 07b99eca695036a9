mod common;

use common::{exhaustive_opt, golden, random_cut, stream};
use proptest::prelude::*;
use substream_core::offline::OfflineAlgorithm;
use substream_core::oracle::{make_coverage, make_hard_instance, HardInstance};
use substream_core::threshold::{guess_exponents, GuessLadder, SolutionBank, ThresholdConfig};
use substream_core::{run_stream, ElementId, Oracle, TraceEvent};

fn coverage_six() -> Oracle {
    // items: a=0 b=1 c=2 d=3 e=4
    make_coverage(
        vec![vec![0, 1], vec![1, 2], vec![3], vec![0, 1, 2], vec![4], vec![2, 3]],
        vec![1.0; 5],
    )
    .unwrap()
}

fn format_output(set: &[ElementId], value: f64) -> String {
    let ids: Vec<usize> = set.iter().map(|e| e.0).collect();
    format!("output set={ids:?} value={value}")
}

#[test]
fn golden_known_estimate_run() {
    let oracle = coverage_six();
    let cfg = ThresholdConfig::new(0.5, 1.0).unwrap().with_p(2).unwrap();
    let mut bank = SolutionBank::for_estimate(&oracle, 4.0, 2, &cfg).unwrap();
    let mut lines = Vec::new();
    for e in stream(6) {
        if let Some(adm) = bank.process(&oracle, e).unwrap() {
            let ev = TraceEvent::Accept {
                element: e,
                tau: bank.tau(),
                slot: adm.slot,
                gain: adm.gain,
            };
            lines.push(ev.to_string());
        }
    }
    let out = bank.finalize(&oracle, &OfflineAlgorithm::brute_force()).unwrap();
    lines.push(format_output(&out.set, out.value));
    assert_eq!(lines, golden("threshold_coverage.trace"));
}

#[test]
fn exponents_match_direct_enumeration() {
    for (m, k, c, eps) in [(1.0, 2, 0.5, 0.1), (3.7, 4, 0.5, 0.05), (0.02, 3, 0.27, 0.2), (10.0, 1, 0.5, 0.5)] {
        let range = guess_exponents(m, k, c, eps).unwrap();
        let b: f64 = 1.0 + eps;
        let expected: Vec<i32> = (-400..400)
            .filter(|&h| {
                let t = b.powi(h);
                t >= m / b * (1.0 - 1e-12) && t <= m * k as f64 / c * (1.0 + 1e-12)
            })
            .collect();
        assert_eq!(range.collect::<Vec<_>>(), expected, "m={m} k={k}");
    }
}

#[test]
fn hard_instance_with_w_last() {
    let inst = HardInstance::new(3, 50).unwrap();
    let oracle = make_hard_instance(3, 50).unwrap();
    let cfg = ThresholdConfig::new(0.1, 1.0).unwrap();
    let mut ladder = GuessLadder::new(&oracle, 3, cfg).unwrap();
    let order = stream(53);
    assert_eq!(*order.last().unwrap(), inst.w());
    let stats = run_stream(&mut ladder, &oracle, &order).unwrap();
    let out = ladder.finalize(&oracle, &OfflineAlgorithm::brute_force()).unwrap();
    let ratio = out.value / inst.optimum_value();
    assert!((0.4..=1.0).contains(&ratio), "ratio {ratio}");
    assert!((stats.peak_stored as f64) <= ladder.stored_budget(8.0));
    assert!(ladder.violations().is_empty(), "{:?}", ladder.violations());
}

#[test]
fn trace_records_ladder_changes_and_admissions() {
    let oracle = Oracle::new(random_cut(8, 5));
    let cfg = ThresholdConfig::new(0.4, 1.0).unwrap();
    let mut ladder = GuessLadder::new(&oracle, 2, cfg).unwrap().with_trace();
    run_stream(&mut ladder, &oracle, &stream(8)).unwrap();
    let lines: Vec<String> = ladder.trace().unwrap().iter().map(ToString::to_string).collect();
    assert!(lines[0].starts_with("event=ladder e="));
    assert!(lines.iter().any(|l| l.starts_with("event=accept") && l.contains(" gain=")));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn known_estimate_half_approximation(seed in 0u64..100_000, n in 6usize..=11, k in 2usize..=4) {
        let eps = 0.2;
        let oracle = Oracle::new(random_cut(n, seed));
        let (_, opt) = exhaustive_opt(oracle.function(), k);
        let cfg = ThresholdConfig::new(eps, 1.0).unwrap();
        let tau = (1.0 - eps / 2.0) * opt;
        let mut bank = SolutionBank::for_estimate(&oracle, tau, k, &cfg).unwrap();
        let order = stream(n);
        run_stream(&mut bank, &oracle, &order).unwrap();
        let out = bank.finalize(&oracle, &OfflineAlgorithm::brute_force()).unwrap();
        prop_assert!(out.value >= (0.5 - eps) * opt - 1e-9, "{} vs {}", out.value, opt);
        prop_assert!(bank.audit_admissions(&oracle).unwrap().is_empty());
        let mut found = Vec::new();
        bank.check_bounds(None, n, &mut found);
        prop_assert!(found.is_empty(), "{:?}", found);
    }

    #[test]
    fn ladder_invariants_and_guarantee(seed in 0u64..100_000, n in 6usize..=11, k in 2usize..=4) {
        let eps = 0.2;
        let oracle = Oracle::new(random_cut(n, seed));
        let (_, opt) = exhaustive_opt(oracle.function(), k);
        let mut ladder = GuessLadder::new(&oracle, k, ThresholdConfig::new(eps, 1.0).unwrap()).unwrap();
        let order = stream(n);
        for (i, &e) in order.iter().enumerate() {
            ladder.process(&oracle, e).unwrap();
            let late = ladder.late_start_mismatches(&oracle, &order[..=i]).unwrap();
            prop_assert!(late.is_empty(), "{:?}", late);
        }
        prop_assert!(ladder.violations().is_empty(), "{:?}", ladder.violations());
        prop_assert!(ladder.audit_admissions(&oracle).unwrap().is_empty());
        prop_assert!(ladder.contains_estimate_for(opt));
        let out = ladder.finalize(&oracle, &OfflineAlgorithm::brute_force()).unwrap();
        prop_assert!(out.value >= (0.5 - eps) * opt - 1e-9, "{} vs {}", out.value, opt);
        prop_assert!(out.set.len() <= k);
    }

    #[test]
    fn ladder_is_deterministic(seed in 0u64..100_000) {
        let oracle = Oracle::new(random_cut(9, seed));
        let run = || {
            let mut l = GuessLadder::new(&oracle, 3, ThresholdConfig::new(0.3, 1.0).unwrap()).unwrap().with_trace();
            run_stream(&mut l, &oracle, &stream(9)).unwrap();
            let out = l.finalize(&oracle, &OfflineAlgorithm::brute_force()).unwrap();
            (out, l.trace().unwrap().to_vec())
        };
        prop_assert_eq!(run(), run());
    }
}
