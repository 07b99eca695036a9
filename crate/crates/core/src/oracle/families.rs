//! Concrete objective families.

use std::sync::Arc;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{ElementId, Oracle, SetFunction};
use crate::error::{Error, Result};

/// Weighted coverage: element `e` covers the universe items `covers[e]`, and
/// `f(S)` is the total weight of the items covered by `S`. Monotone.
#[derive(Debug, Clone, PartialEq)]
pub struct Coverage {
    covers: Vec<Vec<usize>>,
    weights: Vec<f64>,
}

impl Coverage {
    pub fn new(covers: Vec<Vec<usize>>, weights: Vec<f64>) -> Result<Self> {
        if let Some(&w) = weights.iter().find(|w| w.is_nan() || **w < 0.0) {
            return Err(Error::NegativeWeight(w));
        }
        for items in &covers {
            if let Some(&item) = items.iter().find(|&&i| i >= weights.len()) {
                return Err(Error::InvalidParameter(format!(
                    "universe item {item} has no weight (universe size {})",
                    weights.len()
                )));
            }
        }
        Ok(Coverage { covers, weights })
    }

    pub fn universe_size(&self) -> usize {
        self.weights.len()
    }
}

impl SetFunction for Coverage {
    fn ground_size(&self) -> usize {
        self.covers.len()
    }

    fn value(&self, set: &[ElementId]) -> f64 {
        let mut covered = vec![false; self.weights.len()];
        let mut total = 0.0;
        for e in set {
            for &item in &self.covers[e.0] {
                if !covered[item] {
                    covered[item] = true;
                    total += self.weights[item];
                }
            }
        }
        total
    }

    fn describe(&self) -> String {
        format!(
            "coverage(n={}, universe={})",
            self.covers.len(),
            self.weights.len()
        )
    }
}

/// Weighted cut function of a graph. Non-monotone.
///
/// Undirected: weight of edges with exactly one endpoint in `S`.
/// Directed: weight of edges `(u, v)` with `u ∈ S` and `v ∉ S`.
#[derive(Debug, Clone, PartialEq)]
pub struct Cut {
    n: usize,
    edges: Vec<(usize, usize, f64)>,
    directed: bool,
}

impl Cut {
    /// Self-loops are dropped; negative weights are rejected.
    pub fn new(n: usize, edges: Vec<(usize, usize, f64)>, directed: bool) -> Result<Self> {
        let mut kept = Vec::with_capacity(edges.len());
        for (u, v, w) in edges {
            if w.is_nan() || w < 0.0 {
                return Err(Error::NegativeWeight(w));
            }
            for x in [u, v] {
                if x >= n {
                    return Err(Error::OutOfRange {
                        id: ElementId(x),
                        n,
                    });
                }
            }
            if u != v {
                kept.push((u, v, w));
            }
        }
        Ok(Cut {
            n,
            edges: kept,
            directed,
        })
    }

    pub fn edges(&self) -> &[(usize, usize, f64)] {
        &self.edges
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }
}

impl SetFunction for Cut {
    fn ground_size(&self) -> usize {
        self.n
    }

    fn value(&self, set: &[ElementId]) -> f64 {
        let mut inside = vec![false; self.n];
        for e in set {
            inside[e.0] = true;
        }
        self.edges
            .iter()
            .filter(|&&(u, v, _)| {
                if self.directed {
                    inside[u] && !inside[v]
                } else {
                    inside[u] != inside[v]
                }
            })
            .map(|&(_, _, w)| w)
            .sum()
    }

    fn describe(&self) -> String {
        format!(
            "{}cut(n={}, edges={})",
            if self.directed { "directed-" } else { "" },
            self.n,
            self.edges.len()
        )
    }
}

/// `f(S) = Σ_{e∈S} w_e` with non-negative weights.
#[derive(Debug, Clone, PartialEq)]
pub struct Modular {
    weights: Vec<f64>,
}

impl Modular {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if let Some(&w) = weights.iter().find(|w| w.is_nan() || **w < 0.0) {
            return Err(Error::NegativeWeight(w));
        }
        Ok(Modular { weights })
    }
}

impl SetFunction for Modular {
    fn ground_size(&self) -> usize {
        self.weights.len()
    }

    fn value(&self, set: &[ElementId]) -> f64 {
        set.iter().map(|e| self.weights[e.0]).sum()
    }

    fn describe(&self) -> String {
        format!("modular(n={})", self.weights.len())
    }
}

/// Two-branch instance that defeats sublinear-memory streaming algorithms
/// when `w` arrives last:
///
/// ```text
/// f(S) = |S|                 if w ∉ S
/// f(S) = k + |S ∩ {u_i}|     if w ∈ S
/// ```
///
/// Layout: `u_1..u_{k-1}` are ids `0..k-1`, `v_1..v_h` follow, and `w` is the
/// last id, so the natural order already delivers `w` last. The optimum is
/// `{u_1, .., u_{k-1}, w}` with value `2k - 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HardInstance {
    k: usize,
    h: usize,
}

impl HardInstance {
    pub fn new(k: usize, h: usize) -> Result<Self> {
        if k < 1 {
            return Err(Error::InvalidParameter("hard instance needs k >= 1".into()));
        }
        if h < 1 {
            return Err(Error::InvalidParameter("hard instance needs h >= 1".into()));
        }
        Ok(HardInstance { k, h })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn h(&self) -> usize {
        self.h
    }

    /// `u_i` for `1 <= i <= k-1`.
    pub fn u(&self, i: usize) -> ElementId {
        assert!((1..self.k).contains(&i), "u index {i} out of 1..{}", self.k);
        ElementId(i - 1)
    }

    /// `v_i` for `1 <= i <= h`.
    pub fn v(&self, i: usize) -> ElementId {
        assert!((1..=self.h).contains(&i), "v index {i} out of 1..={}", self.h);
        ElementId(self.k - 1 + i - 1)
    }

    pub fn w(&self) -> ElementId {
        ElementId(self.k + self.h - 1)
    }

    pub fn optimum(&self) -> Vec<ElementId> {
        let mut opt: Vec<_> = (1..self.k).map(|i| self.u(i)).collect();
        opt.push(self.w());
        opt
    }

    pub fn optimum_value(&self) -> f64 {
        (2 * self.k - 1) as f64
    }
}

impl SetFunction for HardInstance {
    fn ground_size(&self) -> usize {
        self.k + self.h
    }

    fn value(&self, set: &[ElementId]) -> f64 {
        let w = self.w();
        if set.last() == Some(&w) {
            let us = set.iter().filter(|e| e.0 < self.k - 1).count();
            (self.k + us) as f64
        } else {
            set.len() as f64
        }
    }

    fn describe(&self) -> String {
        format!("hard(k={}, h={})", self.k, self.h)
    }
}

/// `f(S) = |S|^2`. Supermodular; exists only as a fault fixture for the
/// verification battery.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SquaredSize {
    pub n: usize,
}

impl SetFunction for SquaredSize {
    fn ground_size(&self) -> usize {
        self.n
    }

    fn value(&self, set: &[ElementId]) -> f64 {
        (set.len() * set.len()) as f64
    }

    fn describe(&self) -> String {
        format!("squared-size(n={})", self.n)
    }
}

/// `g(S) = f(S ∪ B)` for a fixed base set `B`. Submodular whenever `f` is,
/// and usually has `g(∅) > 0`.
#[derive(Debug, Clone)]
pub struct Contraction {
    inner: Arc<dyn SetFunction>,
    base: Vec<ElementId>,
}

impl Contraction {
    pub fn new(inner: Arc<dyn SetFunction>, base: Vec<ElementId>) -> Result<Self> {
        let base = super::normalize(&base, inner.ground_size())?;
        Ok(Contraction { inner, base })
    }
}

impl SetFunction for Contraction {
    fn ground_size(&self) -> usize {
        self.inner.ground_size()
    }

    fn value(&self, set: &[ElementId]) -> f64 {
        let mut union: Vec<ElementId> = set.iter().chain(&self.base).copied().collect();
        union.sort_unstable();
        union.dedup();
        self.inner.value(&union)
    }

    fn describe(&self) -> String {
        format!("contraction({}, base={:?})", self.inner.describe(), self.base)
    }
}

pub fn make_coverage(covers: Vec<Vec<usize>>, weights: Vec<f64>) -> Result<Oracle> {
    Ok(Oracle::new(Coverage::new(covers, weights)?))
}

pub fn make_cut(n: usize, edges: Vec<(usize, usize, f64)>, directed: bool) -> Result<Oracle> {
    Ok(Oracle::new(Cut::new(n, edges, directed)?))
}

pub fn make_modular(weights: Vec<f64>) -> Result<Oracle> {
    Ok(Oracle::new(Modular::new(weights)?))
}

pub fn make_hard_instance(k: usize, h: usize) -> Result<Oracle> {
    Ok(Oracle::new(HardInstance::new(k, h)?))
}

/// Erdős–Rényi cut instance: each (ordered, if directed) pair becomes an edge
/// with probability `edge_prob`, weight uniform in `[0.5, 2)`.
pub fn make_random_cut(n: usize, edge_prob: f64, directed: bool, seed: u64) -> Result<Cut> {
    if !(0.0..=1.0).contains(&edge_prob) {
        return Err(Error::InvalidParameter(format!(
            "edge probability {edge_prob} outside [0, 1]"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in 0..n {
            if u == v || (!directed && v < u) {
                continue;
            }
            if rng.gen::<f64>() < edge_prob {
                edges.push((u, v, rng.gen_range(0.5..2.0)));
            }
        }
    }
    Cut::new(n, edges, directed)
}

/// Random weighted coverage: each element covers each item with probability
/// `density`; item weights uniform in `[0.5, 2)`.
pub fn make_random_coverage(
    n: usize,
    universe: usize,
    density: f64,
    seed: u64,
) -> Result<Coverage> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let weights = (0..universe).map(|_| rng.gen_range(0.5..2.0)).collect();
    let covers = (0..n)
        .map(|_| {
            (0..universe)
                .filter(|_| rng.gen::<f64>() < density)
                .collect()
        })
        .collect();
    Coverage::new(covers, weights)
}
