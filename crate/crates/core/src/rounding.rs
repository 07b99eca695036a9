//! Dependent rounding of a fractional point `x` with `‖x‖₁ <= k` to a set of
//! at most `k` elements.
//!
//! Both procedures repeatedly merge the two lowest-id strictly fractional
//! coordinates `(a, b)`. Each merge keeps `a + b` fixed and makes at least one
//! of the two coordinates integral:
//!
//! * `a + b <= 1`: `(a + b, 0)` or `(0, a + b)`,
//! * `a + b > 1`:  `(1, a + b - 1)` or `(a + b - 1, 1)`.
//!
//! [`swap_round`] picks the branch at random with the probabilities that keep
//! every marginal unchanged; [`pipage_round_deterministic`] picks the branch
//! with the larger multilinear value, which never decreases `F` because `F` is
//! convex along the direction `1_e - 1_e'`.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::extensions::{multilinear_exact, FractionalPoint};
use crate::oracle::{ElementId, Oracle};
use crate::TOLERANCE;

/// Coordinates this close to 0 or 1 are snapped.
const SNAP: f64 = 1e-12;

/// The two outcomes of merging coordinates `(a, b)` and the probability of
/// the first one under marginal-preserving randomisation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairMove {
    pub first: (f64, f64),
    pub second: (f64, f64),
    pub first_prob: f64,
}

pub fn pair_move(a: f64, b: f64) -> PairMove {
    let s = a + b;
    if s <= 1.0 {
        PairMove {
            first: (s, 0.0),
            second: (0.0, s),
            first_prob: a / s,
        }
    } else {
        PairMove {
            first: (1.0, s - 1.0),
            second: (s - 1.0, 1.0),
            first_prob: (1.0 - b) / (2.0 - s),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RoundingMode {
    /// Deterministic pipage rounding with exact `F`.
    Pipage,
    /// Randomised swap rounding.
    Swap { seed: u64 },
}

pub fn round(oracle: &Oracle, x: &FractionalPoint, k: usize, mode: RoundingMode) -> Result<Vec<ElementId>> {
    match mode {
        RoundingMode::Pipage => pipage_round_deterministic(oracle, x, k),
        RoundingMode::Swap { seed } => swap_round(x, k, seed),
    }
}

struct Work {
    n: usize,
    ones: Vec<ElementId>,
    /// Strictly fractional coordinates, increasing id.
    frac: Vec<(ElementId, f64)>,
}

impl Work {
    fn new(x: &FractionalPoint, k: usize) -> Result<Self> {
        let norm = x.norm1();
        if norm > k as f64 + TOLERANCE {
            return Err(Error::MassExceedsCapacity { norm, k });
        }
        let (ones, frac) = x.split_integral();
        Ok(Work { n: x.n(), ones, frac })
    }

    /// Replaces the first two fractional coordinates by `(va, vb)`.
    fn apply(&mut self, va: f64, vb: f64) {
        let (ea, _) = self.frac[0];
        let (eb, _) = self.frac[1];
        self.frac.drain(..2);
        let mut keep = Vec::new();
        for (e, v) in [(ea, va), (eb, vb)] {
            if v >= 1.0 - SNAP {
                self.ones.push(e);
            } else if v > SNAP {
                keep.push((e, v));
            }
        }
        // At most one survivor; it keeps its place as the lowest id.
        for item in keep.into_iter().rev() {
            self.frac.insert(0, item);
        }
    }

    fn point(&self) -> FractionalPoint {
        let mut x = FractionalPoint::zeros(self.n);
        for &e in &self.ones {
            x.set(e, 1.0).expect("id in range");
        }
        for &(e, v) in &self.frac {
            x.set(e, v).expect("coordinate in range");
        }
        x
    }

    fn point_with_first_two(&self, va: f64, vb: f64) -> FractionalPoint {
        let mut x = self.point();
        x.set(self.frac[0].0, va.clamp(0.0, 1.0)).expect("id in range");
        x.set(self.frac[1].0, vb.clamp(0.0, 1.0)).expect("id in range");
        x
    }

    fn finish(mut self) -> Vec<ElementId> {
        self.ones.sort_unstable();
        self.ones
    }
}

/// Randomised swap rounding; `Pr[e ∈ S] = x_e` for every `e`.
pub fn swap_round(x: &FractionalPoint, k: usize, seed: u64) -> Result<Vec<ElementId>> {
    let mut work = Work::new(x, k)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    while work.frac.len() >= 2 {
        let mv = pair_move(work.frac[0].1, work.frac[1].1);
        let (va, vb) = if rng.gen::<f64>() < mv.first_prob {
            mv.first
        } else {
            mv.second
        };
        work.apply(va, vb);
    }
    if let Some(&(e, v)) = work.frac.first() {
        // Only float noise can leave a lone coordinate when |ones| = k.
        if work.ones.len() < k && rng.gen::<f64>() < v {
            work.ones.push(e);
        }
        work.frac.clear();
    }
    Ok(work.finish())
}

/// Deterministic pipage rounding; `f(S) >= F(x)`. Needs exact `F`, so the
/// point may have at most [`EXACT_CAP`](crate::extensions::EXACT_CAP)
/// fractional coordinates.
pub fn pipage_round_deterministic(
    oracle: &Oracle,
    x: &FractionalPoint,
    k: usize,
) -> Result<Vec<ElementId>> {
    let mut work = Work::new(x, k)?;
    if work.frac.len() > crate::extensions::EXACT_CAP {
        return Err(Error::ExactCapExceeded {
            found: work.frac.len(),
            cap: crate::extensions::EXACT_CAP,
        });
    }
    while work.frac.len() >= 2 {
        let mv = pair_move(work.frac[0].1, work.frac[1].1);
        let first = multilinear_exact(oracle, &work.point_with_first_two(mv.first.0, mv.first.1))?;
        let second =
            multilinear_exact(oracle, &work.point_with_first_two(mv.second.0, mv.second.1))?;
        let (va, vb) = if first >= second { mv.first } else { mv.second };
        work.apply(va, vb);
    }
    if let Some(&(e, _)) = work.frac.first() {
        if work.ones.len() < k {
            let without = oracle.evaluate(&work.ones)?;
            let with = oracle.evaluate_with(&work.ones, e)?;
            if with > without {
                work.ones.push(e);
            }
        }
        work.frac.clear();
    }
    Ok(work.finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{ids, make_cut};
    use proptest::prelude::*;

    #[test]
    fn integral_points_round_to_their_support() {
        let x = FractionalPoint::indicator(5, &ids(&[1, 3])).unwrap();
        for seed in 0..20 {
            assert_eq!(swap_round(&x, 2, seed).unwrap(), ids(&[1, 3]));
        }
        let oracle = make_cut(5, vec![(0, 1, 1.0)], false).unwrap();
        assert_eq!(pipage_round_deterministic(&oracle, &x, 2).unwrap(), ids(&[1, 3]));
    }

    #[test]
    fn half_half_picks_exactly_one() {
        let x = FractionalPoint::from_dense(&[0.5, 0.5]).unwrap();
        let mut first = 0;
        for seed in 0..2000 {
            let s = swap_round(&x, 1, seed).unwrap();
            assert_eq!(s.len(), 1);
            if s[0] == ElementId(0) {
                first += 1;
            }
        }
        // 3 sigma of Binomial(2000, 0.5) is about 67.
        assert!((first as i64 - 1000).abs() < 67, "first = {first}");
    }

    #[test]
    fn pipage_on_unit_edge_reaches_one() {
        let oracle = make_cut(2, vec![(0, 1, 1.0)], false).unwrap();
        let x = FractionalPoint::from_dense(&[0.5, 0.5]).unwrap();
        let s = pipage_round_deterministic(&oracle, &x, 2).unwrap();
        assert!(oracle.evaluate(&s).unwrap() >= 0.5);
    }

    #[test]
    fn rejects_overfull_points() {
        let x = FractionalPoint::from_dense(&[0.9, 0.9, 0.9]).unwrap();
        assert!(matches!(
            swap_round(&x, 2, 0),
            Err(Error::MassExceedsCapacity { .. })
        ));
    }

    proptest! {
        #[test]
        fn pair_move_conserves_mass_and_marginals(a in 1e-6f64..1.0, b in 1e-6f64..1.0) {
            let mv = pair_move(a, b);
            prop_assert!((mv.first.0 + mv.first.1 - a - b).abs() < 1e-12);
            prop_assert!((mv.second.0 + mv.second.1 - a - b).abs() < 1e-12);
            prop_assert!((0.0..=1.0).contains(&mv.first_prob));
            let q = mv.first_prob;
            prop_assert!((q * mv.first.0 + (1.0 - q) * mv.second.0 - a).abs() < 1e-12);
            prop_assert!((q * mv.first.1 + (1.0 - q) * mv.second.1 - b).abs() < 1e-12);
            // One coordinate becomes integral in either branch.
            for (u, v) in [mv.first, mv.second] {
                let integral = |t: f64| t == 0.0 || t == 1.0;
                prop_assert!(integral(u) || integral(v));
            }
        }

        #[test]
        fn swap_round_is_feasible(values in proptest::collection::vec(0.0f64..1.0, 1..10), seed in 0u64..1000) {
            let x = FractionalPoint::from_dense(&values).unwrap();
            let k = x.norm1().ceil().max(1.0) as usize;
            let s = swap_round(&x, k, seed).unwrap();
            prop_assert!(s.len() <= k);
            prop_assert!(s.iter().all(|e| x.get(*e) > 0.0));
        }
    }
}
