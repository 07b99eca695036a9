#![allow(dead_code)]

use substream_core::oracle::{make_cut, make_random_cut, Cut};
use substream_core::{ElementId, Oracle, SetFunction};

/// Exhaustive optimum over bitmasks, evaluated through the raw function so
/// the oracle counter and the crate's own enumerator stay out of it.
pub fn exhaustive_opt(f: &dyn SetFunction, k: usize) -> (Vec<ElementId>, f64) {
    let n = f.ground_size();
    assert!(n <= 20);
    let mut best = (Vec::new(), f.value(&[]));
    for mask in 1u32..(1u32 << n) {
        if mask.count_ones() as usize > k {
            continue;
        }
        let set: Vec<ElementId> = (0..n).filter(|i| mask >> i & 1 == 1).map(ElementId).collect();
        let v = f.value(&set);
        if v > best.1 + 1e-12 {
            best = (set, v);
        }
    }
    best
}

/// Cut value straight from an edge list.
pub fn cut_value(edges: &[(usize, usize, f64)], directed: bool, set: &[usize]) -> f64 {
    edges
        .iter()
        .filter(|&&(u, v, _)| {
            let (iu, iv) = (set.contains(&u), set.contains(&v));
            if directed {
                iu && !iv
            } else {
                iu != iv
            }
        })
        .map(|&(_, _, w)| w)
        .sum()
}

/// A seeded random undirected cut on `n` vertices with at least one edge.
pub fn random_cut(n: usize, seed: u64) -> Cut {
    let mut s = seed;
    loop {
        let cut = make_random_cut(n, 0.4, false, s).unwrap();
        if !cut.edges().is_empty() {
            return cut;
        }
        s = s.wrapping_add(1_000_003);
    }
}

/// The 6-cycle with unit weights.
pub fn six_cycle() -> Oracle {
    make_cut(6, (0..6).map(|i| (i, (i + 1) % 6, 1.0)).collect(), false).unwrap()
}

pub fn stream(n: usize) -> Vec<ElementId> {
    (0..n).map(ElementId).collect()
}

/// Golden file contents with `#` comments and blank lines removed.
pub fn golden(name: &str) -> Vec<String> {
    let path = format!("{}/tests/golden/{name}", env!("CARGO_MANIFEST_DIR"));
    std::fs::read_to_string(&path)
        .unwrap_or_else(|e| panic!("{path}: {e}"))
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(String::from)
        .collect()
}

pub fn mean_and_sd(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
    (mean, var.sqrt())
}
