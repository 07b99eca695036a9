//! Dataset references and stream construction.
//!
//! | reference                       | objective                          |
//! |---------------------------------|------------------------------------|
//! | `hard:K:H`                      | two-branch hard instance           |
//! | `random-cut:N:PROB:SEED`        | random undirected weighted cut     |
//! | `random-dcut:N:PROB:SEED`       | random directed weighted cut       |
//! | `random-coverage:N:U:DENS:SEED` | random weighted coverage           |
//! | `modular:W1:W2:...`             | modular weights                    |
//! | `edges:PATH` / `dedges:PATH`    | undirected / directed edge list    |
//! | `coverage:PATH`                 | coverage file                      |
//!
//! Relative paths resolve against the directory of the config file.

use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use substream_core::oracle::formats::{parse_coverage, parse_edge_list};
use substream_core::oracle::{make_random_coverage, make_random_cut, HardInstance, Modular};
use substream_core::{ElementId, Oracle};

use crate::config::Order;
use crate::error::{HarnessError, Result};

pub struct Dataset {
    pub reference: String,
    pub oracle: Oracle,
    /// Optimum value known in closed form.
    pub analytic_opt: Option<f64>,
}

impl std::fmt::Debug for Dataset {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Dataset")
            .field("reference", &self.reference)
            .field("n", &self.oracle.n())
            .finish()
    }
}

fn bad(reference: &str, message: impl Into<String>) -> HarnessError {
    HarnessError::Dataset {
        reference: reference.to_string(),
        message: message.into(),
    }
}

fn num<T: std::str::FromStr>(reference: &str, what: &str, s: &str) -> Result<T> {
    s.parse().map_err(|_| bad(reference, format!("bad {what} `{s}`")))
}

fn read(reference: &str, base: &Path, path: &str) -> Result<String> {
    let p = Path::new(path);
    let full = if p.is_absolute() { p.to_path_buf() } else { base.join(p) };
    std::fs::read_to_string(&full).map_err(|e| bad(reference, format!("{}: {e}", full.display())))
}

pub fn load(reference: &str, base: &Path) -> Result<Dataset> {
    let (kind, rest) = reference
        .split_once(':')
        .ok_or_else(|| bad(reference, "expected `kind:arguments`"))?;
    let args: Vec<&str> = rest.split(':').collect();
    let arity = |n: usize| {
        if args.len() == n {
            Ok(())
        } else {
            Err(bad(reference, format!("`{kind}` takes {n} arguments, got {}", args.len())))
        }
    };
    let mut analytic_opt = None;
    let oracle = match kind {
        "hard" => {
            arity(2)?;
            let inst = HardInstance::new(num(reference, "k", args[0])?, num(reference, "h", args[1])?)?;
            analytic_opt = Some(inst.optimum_value());
            Oracle::new(inst)
        }
        "random-cut" | "random-dcut" => {
            arity(3)?;
            Oracle::new(make_random_cut(
                num(reference, "n", args[0])?,
                num(reference, "edge probability", args[1])?,
                kind == "random-dcut",
                num(reference, "seed", args[2])?,
            )?)
        }
        "random-coverage" => {
            arity(4)?;
            Oracle::new(make_random_coverage(
                num(reference, "n", args[0])?,
                num(reference, "universe size", args[1])?,
                num(reference, "density", args[2])?,
                num(reference, "seed", args[3])?,
            )?)
        }
        "modular" => {
            let weights = args
                .iter()
                .map(|w| num(reference, "weight", w))
                .collect::<Result<Vec<f64>>>()?;
            Oracle::new(Modular::new(weights)?)
        }
        "edges" | "dedges" => {
            let text = read(reference, base, rest)?;
            Oracle::new(parse_edge_list(&text)?.into_cut(kind == "dedges")?)
        }
        "coverage" => Oracle::new(parse_coverage(&read(reference, base, rest)?)?),
        other => return Err(bad(reference, format!("unknown dataset kind `{other}`"))),
    };
    Ok(Dataset {
        reference: reference.to_string(),
        oracle,
        analytic_opt,
    })
}

/// The stream: all `n` ids in file order or a seeded permutation, then cut
/// to `limit`.
pub fn build_stream(n: usize, order: Order, limit: Option<usize>) -> Vec<ElementId> {
    let mut ids: Vec<ElementId> = (0..n).map(ElementId).collect();
    if let Order::Shuffle(seed) = order {
        ids.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    }
    if let Some(l) = limit {
        ids.truncate(l);
    }
    ids
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn references_parse() {
        let base = Path::new(".");
        let d = load("hard:3:9", base).unwrap();
        assert_eq!(d.oracle.n(), 12);
        assert_eq!(d.analytic_opt, Some(5.0));
        assert_eq!(load("random-cut:10:0.3:1", base).unwrap().oracle.n(), 10);
        assert_eq!(load("random-coverage:7:9:0.3:1", base).unwrap().oracle.n(), 7);
        let m = load("modular:1:2.5:3", base).unwrap();
        assert_eq!(m.oracle.evaluate(&[ElementId(1)]).unwrap(), 2.5);
    }

    #[test]
    fn bad_references_are_named() {
        let base = Path::new(".");
        for r in ["hard:3", "nope:1", "modular:1:x", "plain", "edges:/does/not/exist"] {
            assert!(matches!(load(r, base), Err(HarnessError::Dataset { .. })), "{r}");
        }
    }

    #[test]
    fn shuffle_is_a_seeded_permutation() {
        let a = build_stream(50, Order::Shuffle(3), None);
        assert_eq!(a, build_stream(50, Order::Shuffle(3), None));
        assert_ne!(a, build_stream(50, Order::File, None));
        let mut sorted = a.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, build_stream(50, Order::File, None));
        assert_eq!(build_stream(50, Order::File, Some(5)).len(), 5);
    }
}
