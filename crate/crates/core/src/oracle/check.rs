//! Submodularity checks by enumeration or seeded sampling.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{mask_to_set, ElementId, Oracle};
use crate::error::{Error, Result};
use crate::TOLERANCE;

/// Largest ground set checked exhaustively (all `4^n` pairs).
pub const EXHAUSTIVE_CAP: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckMode {
    Exhaustive,
    Sampled { pairs: usize, seed: u64 },
}

/// A pair `(A, B)` with `f(A) + f(B) < f(A∩B) + f(A∪B) - tol`.
#[derive(Debug, Clone, PartialEq)]
pub struct SubmodularityViolation {
    pub a: Vec<ElementId>,
    pub b: Vec<ElementId>,
    pub excess: f64,
}

/// `A ⊆ B ⊆ N∖{e}` with `f(e|A) < f(e|B) - tol`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiminishingReturnsViolation {
    pub element: ElementId,
    pub a: Vec<ElementId>,
    pub b: Vec<ElementId>,
    pub excess: f64,
}

fn value_table(oracle: &Oracle) -> Result<Vec<f64>> {
    let n = oracle.n();
    (0..1u64 << n)
        .map(|mask| oracle.evaluate(&mask_to_set(mask, n)))
        .collect()
}

pub fn find_submodularity_violation(
    oracle: &Oracle,
    mode: CheckMode,
) -> Result<Option<SubmodularityViolation>> {
    let n = oracle.n();
    match mode {
        CheckMode::Exhaustive => {
            if n > EXHAUSTIVE_CAP {
                return Err(Error::ExhaustiveCapExceeded {
                    n,
                    cap: EXHAUSTIVE_CAP,
                });
            }
            let table = value_table(oracle)?;
            let full = 1u64 << n;
            for a in 0..full {
                for b in (a + 1)..full {
                    let lhs = table[a as usize] + table[b as usize];
                    let rhs = table[(a & b) as usize] + table[(a | b) as usize];
                    if lhs < rhs - TOLERANCE {
                        return Ok(Some(SubmodularityViolation {
                            a: mask_to_set(a, n),
                            b: mask_to_set(b, n),
                            excess: rhs - lhs,
                        }));
                    }
                }
            }
            Ok(None)
        }
        CheckMode::Sampled { pairs, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..pairs {
                let in_a: Vec<bool> = (0..n).map(|_| rng.gen()).collect();
                let in_b: Vec<bool> = (0..n).map(|_| rng.gen()).collect();
                let pick = |pred: &dyn Fn(usize) -> bool| -> Vec<ElementId> {
                    (0..n).filter(|&i| pred(i)).map(ElementId).collect()
                };
                let a = pick(&|i| in_a[i]);
                let b = pick(&|i| in_b[i]);
                let meet = pick(&|i| in_a[i] && in_b[i]);
                let join = pick(&|i| in_a[i] || in_b[i]);
                let lhs = oracle.evaluate(&a)? + oracle.evaluate(&b)?;
                let rhs = oracle.evaluate(&meet)? + oracle.evaluate(&join)?;
                if lhs < rhs - TOLERANCE {
                    return Ok(Some(SubmodularityViolation {
                        a,
                        b,
                        excess: rhs - lhs,
                    }));
                }
            }
            Ok(None)
        }
    }
}

/// `true` iff `f(A) + f(B) >= f(A∩B) + f(A∪B) - 1e-9` on every checked pair.
pub fn verify_submodular(oracle: &Oracle, mode: CheckMode) -> Result<bool> {
    Ok(find_submodularity_violation(oracle, mode)?.is_none())
}

/// Exhaustive diminishing-returns check over every `e` and `A ⊆ B ⊆ N∖{e}`.
pub fn find_diminishing_returns_violation(
    oracle: &Oracle,
) -> Result<Option<DiminishingReturnsViolation>> {
    let n = oracle.n();
    if n > EXHAUSTIVE_CAP {
        return Err(Error::ExhaustiveCapExceeded {
            n,
            cap: EXHAUSTIVE_CAP,
        });
    }
    let table = value_table(oracle)?;
    let full = (1u64 << n) - 1;
    for e in 0..n {
        let bit = 1u64 << e;
        let rest = full & !bit;
        // b ranges over subsets of N∖{e}, a over subsets of b.
        let mut b = rest;
        loop {
            let gain_b = table[(b | bit) as usize] - table[b as usize];
            let mut a = b;
            loop {
                let gain_a = table[(a | bit) as usize] - table[a as usize];
                if gain_a < gain_b - TOLERANCE {
                    return Ok(Some(DiminishingReturnsViolation {
                        element: ElementId(e),
                        a: mask_to_set(a, n),
                        b: mask_to_set(b, n),
                        excess: gain_b - gain_a,
                    }));
                }
                if a == 0 {
                    break;
                }
                a = (a - 1) & b;
            }
            if b == 0 {
                break;
            }
            b = (b - 1) & rest;
        }
    }
    Ok(None)
}
