//! Estimators for quantities that appear only in the analysis of the
//! randomized variant. None of this runs inside the streaming algorithm.
//!
//! For an element `e` and sampling rate `1/m`,
//! `p_e = Pr_X[e ∈ STGreedy(X ∪ {e})]` where `X` keeps each other stream
//! element independently with probability `1/m`. Elements of an optimum
//! split into `O₁ = {p_e >= ε}` and `O₂`; `O'₂ ⊆ O₂` keeps those rejected by
//! threshold greedy on `V_{1,1} ∪ {e}`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{part_of, st_greedy};
use crate::error::{Error, Result};
use crate::extensions::Estimate;
use crate::oracle::{ElementId, Oracle};

/// Largest stream for exhaustive `p_e`.
pub const EXACT_PE_CAP: usize = 20;

/// Threshold greedy parameters shared by the estimators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GreedyParams {
    pub k: usize,
    pub rho: f64,
}

/// `stream` restricted to `keep`, with `e` inserted at its stream position.
fn with_element(stream: &[ElementId], e: ElementId, keep: impl Fn(usize, ElementId) -> bool) -> Vec<ElementId> {
    stream
        .iter()
        .enumerate()
        .filter(|&(idx, &x)| x == e || keep(idx, x))
        .map(|(_, &x)| x)
        .collect()
}

fn accepts(oracle: &Oracle, subset: &[ElementId], e: ElementId, g: GreedyParams) -> Result<bool> {
    Ok(st_greedy(oracle, subset, g.k, g.rho)?.contains(&e))
}

/// Monte Carlo `p_e` with `trials` independent `1/m`-samples.
pub fn estimate_pe(
    oracle: &Oracle,
    stream: &[ElementId],
    e: ElementId,
    m: usize,
    g: GreedyParams,
    trials: usize,
    seed: u64,
) -> Result<Estimate> {
    if m == 0 || trials == 0 {
        return Err(Error::InvalidParameter("m and trials must be >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rate = 1.0 / m as f64;
    let mut hits = Vec::with_capacity(trials);
    for _ in 0..trials {
        let keep: Vec<bool> = stream.iter().map(|_| rng.gen::<f64>() < rate).collect();
        let sample = with_element(stream, e, |idx, _| keep[idx]);
        hits.push(if accepts(oracle, &sample, e, g)? { 1.0 } else { 0.0 });
    }
    Ok(Estimate::from_samples(&hits))
}

/// Exact `p_e` by enumerating every subset of the other stream elements,
/// weighted by its `1/m`-sampling probability.
pub fn exact_pe(oracle: &Oracle, stream: &[ElementId], e: ElementId, m: usize, g: GreedyParams) -> Result<f64> {
    if m == 0 {
        return Err(Error::InvalidParameter("m must be >= 1".into()));
    }
    let others: Vec<usize> = (0..stream.len()).filter(|&i| stream[i] != e).collect();
    if others.len() > EXACT_PE_CAP {
        return Err(Error::ExhaustiveCapExceeded {
            n: others.len(),
            cap: EXACT_PE_CAP,
        });
    }
    let q = 1.0 / m as f64;
    let mut total = 0.0;
    for mask in 0u64..(1u64 << others.len()) {
        let mut prob = 1.0;
        let mut keep = vec![false; stream.len()];
        for (bit, &idx) in others.iter().enumerate() {
            if mask >> bit & 1 == 1 {
                keep[idx] = true;
                prob *= q;
            } else {
                prob *= 1.0 - q;
            }
        }
        if prob == 0.0 {
            continue;
        }
        let sample = with_element(stream, e, |idx, _| keep[idx]);
        if accepts(oracle, &sample, e, g)? {
            total += prob;
        }
    }
    Ok(total)
}

/// Splits `opt` by `p_e >= epsilon` into `(O₁, O₂)`.
pub fn split_opt(pe: &[(ElementId, f64)], epsilon: f64) -> (Vec<ElementId>, Vec<ElementId>) {
    let (o1, o2): (Vec<_>, Vec<_>) = pe.iter().partition(|&&(_, p)| p >= epsilon);
    (o1.into_iter().map(|(e, _)| e).collect(), o2.into_iter().map(|(e, _)| e).collect())
}

/// `V_{i,j}` for every part `j` of repetition `i`, in stream order.
pub fn rebuild_parts(stream: &[ElementId], seed: u64, i: usize, m: usize) -> Vec<Vec<ElementId>> {
    let mut out = vec![Vec::new(); m];
    for &e in stream {
        out[part_of(seed, i, e, m)].push(e);
    }
    out
}

/// `O'₂ = {e ∈ O₂ : e ∉ STGreedy(V ∪ {e})}` with `V = V_{1,1}`.
pub fn o2_prime(
    oracle: &Oracle,
    stream: &[ElementId],
    part: &[ElementId],
    o2: &[ElementId],
    g: GreedyParams,
) -> Result<Vec<ElementId>> {
    let mut out = Vec::new();
    for &e in o2 {
        let sample = with_element(stream, e, |_, x| part.contains(&x));
        if !accepts(oracle, &sample, e, g)? {
            out.push(e);
        }
    }
    Ok(out)
}

/// Whether `STGreedy(V ∪ extra) = STGreedy(V)` with both taken in stream
/// order.
pub fn consistency_holds(
    oracle: &Oracle,
    stream: &[ElementId],
    part: &[ElementId],
    extra: &[ElementId],
    g: GreedyParams,
) -> Result<bool> {
    let base: Vec<ElementId> = stream.iter().copied().filter(|x| part.contains(x)).collect();
    let joined: Vec<ElementId> = stream
        .iter()
        .copied()
        .filter(|x| part.contains(x) || extra.contains(x))
        .collect();
    Ok(st_greedy(oracle, &joined, g.k, g.rho)? == st_greedy(oracle, &base, g.k, g.rho)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{ids, make_modular};

    #[test]
    fn below_threshold_element_has_zero_pe() {
        let oracle = make_modular(vec![0.5, 3.0, 3.0]).unwrap();
        let g = GreedyParams { k: 2, rho: 1.0 };
        let stream = ids(&[1, 0, 2]);
        assert_eq!(exact_pe(&oracle, &stream, ElementId(0), 3, g).unwrap(), 0.0);
        let est = estimate_pe(&oracle, &stream, ElementId(0), 3, g, 200, 4).unwrap();
        assert_eq!(est.mean, 0.0);
    }

    #[test]
    fn full_sampling_is_deterministic() {
        // With m = 1 the sample is the whole stream: k = 1 and element 2
        // arrives after element 1 has filled the solution.
        let oracle = make_modular(vec![1.0, 3.0, 3.0]).unwrap();
        let g = GreedyParams { k: 1, rho: 1.0 };
        let stream = ids(&[0, 1, 2]);
        assert_eq!(exact_pe(&oracle, &stream, ElementId(0), 1, g).unwrap(), 1.0);
        assert_eq!(exact_pe(&oracle, &stream, ElementId(2), 1, g).unwrap(), 0.0);
    }

    #[test]
    fn second_in_line_has_probability_of_missing_first() {
        // Element 1 is accepted iff element 0 is not sampled: p = 1 - 1/m.
        let oracle = make_modular(vec![2.0, 2.0]).unwrap();
        let g = GreedyParams { k: 1, rho: 1.0 };
        let p = exact_pe(&oracle, &ids(&[0, 1]), ElementId(1), 4, g).unwrap();
        assert!((p - 0.75).abs() < 1e-12);
    }

    #[test]
    fn parts_partition_the_stream() {
        let stream = ids(&[3, 1, 4, 0, 5, 2, 7, 6]);
        let parts = rebuild_parts(&stream, 11, 2, 3);
        let mut all: Vec<ElementId> = parts.concat();
        all.sort_unstable();
        assert_eq!(all, ids(&[0, 1, 2, 3, 4, 5, 6, 7]));
    }
}
