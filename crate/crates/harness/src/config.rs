//! Flat `key = value` run configuration.
//!
//! ```text
//! # comments start with '#'
//! algorithm = threshold
//! dataset   = random-cut:12:0.4:7
//! k         = 3
//! epsilon   = 0.2
//! ```
//!
//! Keys, in the order [`RunConfig::to_text`] writes them: `algorithm`,
//! `dataset`, `k`, `epsilon`, `alpha`, `offline`, `p`, `seed`, `order`,
//! `derivative_mode`, `samples`, `rounding`, `tau`, `tau_factor`, `limit`,
//! `c_r`, `eps_prime`. Sweep files use the same keys with comma-separated
//! value lists; see [`parse_grid`].

use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};
use substream_core::extensions::DerivativeMode;
use substream_core::offline::OfflineAlgorithm;
use substream_core::randomized::DEFAULT_C_R;
use substream_core::rounding::RoundingMode;

use crate::error::{HarnessError, Result};

pub const KEYS: [&str; 17] = [
    "algorithm",
    "dataset",
    "k",
    "epsilon",
    "alpha",
    "offline",
    "p",
    "seed",
    "order",
    "derivative_mode",
    "samples",
    "rounding",
    "tau",
    "tau_factor",
    "limit",
    "c_r",
    "eps_prime",
];

macro_rules! serialize_as_display {
    ($($t:ty),*) => {$(
        impl Serialize for $t {
            fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
                s.collect_str(self)
            }
        }
    )*};
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    Threshold,
    ThresholdKnownTau,
    Extension,
    ExtensionKnownTau,
    Randomized,
    RandomizedKnownTau,
    Greedy,
    RandomGreedy,
    BruteForce,
}

impl Algorithm {
    pub const ALL: [Algorithm; 9] = [
        Algorithm::Threshold,
        Algorithm::ThresholdKnownTau,
        Algorithm::Extension,
        Algorithm::ExtensionKnownTau,
        Algorithm::Randomized,
        Algorithm::RandomizedKnownTau,
        Algorithm::Greedy,
        Algorithm::RandomGreedy,
        Algorithm::BruteForce,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Threshold => "threshold",
            Algorithm::ThresholdKnownTau => "threshold-known-tau",
            Algorithm::Extension => "extension",
            Algorithm::ExtensionKnownTau => "extension-known-tau",
            Algorithm::Randomized => "randomized",
            Algorithm::RandomizedKnownTau => "randomized-known-tau",
            Algorithm::Greedy => "greedy",
            Algorithm::RandomGreedy => "random-greedy",
            Algorithm::BruteForce => "brute-force",
        }
    }

    pub fn needs_estimate(self) -> bool {
        matches!(
            self,
            Algorithm::ThresholdKnownTau | Algorithm::ExtensionKnownTau | Algorithm::RandomizedKnownTau
        )
    }

    /// Default `τ / OPT` for the known-estimate variants.
    pub fn default_tau_factor(self, epsilon: f64) -> f64 {
        match self {
            Algorithm::ThresholdKnownTau => 1.0 - epsilon / 2.0,
            Algorithm::ExtensionKnownTau => 1.0 - epsilon / 8.0,
            _ => 1.0,
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| HarnessError::UnknownAlgorithm(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OfflineChoice {
    BruteForce,
    RandomGreedy,
    Greedy,
}

impl OfflineChoice {
    /// The offline algorithm, with `seed` feeding random greedy.
    pub fn build(self, seed: u64) -> OfflineAlgorithm {
        match self {
            OfflineChoice::BruteForce => OfflineAlgorithm::brute_force(),
            OfflineChoice::RandomGreedy => OfflineAlgorithm::RandomGreedy { seed },
            OfflineChoice::Greedy => OfflineAlgorithm::Greedy,
        }
    }
}

impl fmt::Display for OfflineChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.build(0).name())
    }
}

impl FromStr for OfflineChoice {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "brute-force" => Ok(OfflineChoice::BruteForce),
            "random-greedy" => Ok(OfflineChoice::RandomGreedy),
            "greedy" => Ok(OfflineChoice::Greedy),
            _ => Err(format!("unknown offline algorithm `{s}`")),
        }
    }
}

/// Stream order over the dataset's ground set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Order {
    File,
    Shuffle(u64),
}

impl fmt::Display for Order {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Order::File => f.write_str("file"),
            Order::Shuffle(seed) => write!(f, "shuffle:{seed}"),
        }
    }
}

impl FromStr for Order {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.split_once(':') {
            None if s == "file" => Ok(Order::File),
            Some(("shuffle", seed)) => seed
                .parse()
                .map(Order::Shuffle)
                .map_err(|_| format!("bad shuffle seed `{seed}`")),
            _ => Err(format!("order must be `file` or `shuffle:SEED`, got `{s}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DerivativeChoice {
    /// Exact up to the enumeration cap, sampled beyond it.
    Auto,
    Exact,
    Sampled,
}

impl DerivativeChoice {
    pub fn resolve(self, n: usize, samples: usize, seed: u64) -> DerivativeMode {
        match self {
            DerivativeChoice::Auto => DerivativeMode::default_for(n, samples, seed),
            DerivativeChoice::Exact => DerivativeMode::Exact,
            DerivativeChoice::Sampled => DerivativeMode::Sampled { samples, seed },
        }
    }
}

impl fmt::Display for DerivativeChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DerivativeChoice::Auto => "auto",
            DerivativeChoice::Exact => "exact",
            DerivativeChoice::Sampled => "sampled",
        })
    }
}

impl FromStr for DerivativeChoice {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "auto" => Ok(DerivativeChoice::Auto),
            "exact" => Ok(DerivativeChoice::Exact),
            "sampled" => Ok(DerivativeChoice::Sampled),
            _ => Err(format!("derivative_mode must be auto, exact or sampled, got `{s}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RoundingChoice {
    Pipage,
    Swap,
}

impl RoundingChoice {
    pub fn build(self, seed: u64) -> RoundingMode {
        match self {
            RoundingChoice::Pipage => RoundingMode::Pipage,
            RoundingChoice::Swap => RoundingMode::Swap { seed },
        }
    }
}

impl fmt::Display for RoundingChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RoundingChoice::Pipage => "pipage",
            RoundingChoice::Swap => "swap",
        })
    }
}

impl FromStr for RoundingChoice {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "pipage" => Ok(RoundingChoice::Pipage),
            "swap" => Ok(RoundingChoice::Swap),
            _ => Err(format!("rounding must be pipage or swap, got `{s}`")),
        }
    }
}

serialize_as_display!(Algorithm, OfflineChoice, Order, DerivativeChoice, RoundingChoice);

/// One algorithm on one stream.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub algorithm: Algorithm,
    pub dataset: String,
    pub k: usize,
    pub epsilon: f64,
    /// Approximation factor used in thresholds; defaults to the offline
    /// algorithm's own factor.
    pub alpha: Option<f64>,
    pub offline: OfflineChoice,
    /// Solutions per guess (threshold) or per-element increment (extension).
    pub p: Option<f64>,
    pub seed: u64,
    pub order: Order,
    pub derivative_mode: DerivativeChoice,
    pub samples: usize,
    pub rounding: RoundingChoice,
    pub tau: Option<f64>,
    pub tau_factor: Option<f64>,
    pub limit: Option<usize>,
    pub c_r: f64,
    pub eps_prime: Option<f64>,
}

impl RunConfig {
    pub fn new(algorithm: Algorithm, dataset: impl Into<String>, k: usize) -> Self {
        RunConfig {
            algorithm,
            dataset: dataset.into(),
            k,
            epsilon: 0.2,
            alpha: None,
            offline: OfflineChoice::BruteForce,
            p: None,
            seed: 0,
            order: Order::File,
            derivative_mode: DerivativeChoice::Auto,
            samples: 1000,
            rounding: RoundingChoice::Pipage,
            tau: None,
            tau_factor: None,
            limit: None,
            c_r: DEFAULT_C_R,
            eps_prime: None,
        }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha.unwrap_or_else(|| self.offline.build(self.seed).alpha())
    }

    pub fn tau_factor(&self) -> f64 {
        self.tau_factor
            .unwrap_or_else(|| self.algorithm.default_tau_factor(self.epsilon))
    }

    pub fn parse(text: &str) -> Result<Self> {
        let pairs = parse_pairs(text)?;
        Self::from_pairs(pairs.iter().map(|(l, k, v)| (*l, k.as_str(), v.as_str())))
    }

    fn from_pairs<'a>(pairs: impl IntoIterator<Item = (usize, &'a str, &'a str)>) -> Result<Self> {
        let mut algorithm = None;
        let mut dataset = None;
        let mut k = None;
        let mut rest = Vec::new();
        for (line, key, value) in pairs {
            match key {
                "algorithm" => algorithm = Some(value.parse::<Algorithm>()?),
                "dataset" => dataset = Some(value.to_string()),
                "k" => k = Some(field(line, key, value)?),
                _ => rest.push((line, key, value)),
            }
        }
        let mut cfg = RunConfig::new(
            algorithm.ok_or(HarnessError::MissingKey("algorithm"))?,
            dataset.ok_or(HarnessError::MissingKey("dataset"))?,
            k.ok_or(HarnessError::MissingKey("k"))?,
        );
        for (line, key, value) in rest {
            match key {
                "epsilon" => cfg.epsilon = field(line, key, value)?,
                "alpha" => cfg.alpha = Some(field(line, key, value)?),
                "offline" => cfg.offline = field(line, key, value)?,
                "p" => cfg.p = Some(field(line, key, value)?),
                "seed" => cfg.seed = field(line, key, value)?,
                "order" => cfg.order = field(line, key, value)?,
                "derivative_mode" => cfg.derivative_mode = field(line, key, value)?,
                "samples" => cfg.samples = field(line, key, value)?,
                "rounding" => cfg.rounding = field(line, key, value)?,
                "tau" => cfg.tau = Some(field(line, key, value)?),
                "tau_factor" => cfg.tau_factor = Some(field(line, key, value)?),
                "limit" => cfg.limit = Some(field(line, key, value)?),
                "c_r" => cfg.c_r = field(line, key, value)?,
                "eps_prime" => cfg.eps_prime = Some(field(line, key, value)?),
                other => return Err(HarnessError::UnknownKey(other.to_string())),
            }
        }
        if cfg.k == 0 {
            return Err(HarnessError::Config {
                line: 0,
                message: "k must be >= 1".into(),
            });
        }
        Ok(cfg)
    }

    /// Every set key in canonical order; `parse(to_text(c)) == c`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (key, value) in self.pairs() {
            out.push_str(&format!("{key} = {value}\n"));
        }
        out
    }

    /// Set keys and their textual values, in canonical order.
    pub fn pairs(&self) -> Vec<(&'static str, String)> {
        let opt = |v: Option<String>| v;
        let all = [
            Some(self.algorithm.to_string()),
            Some(self.dataset.clone()),
            Some(self.k.to_string()),
            Some(self.epsilon.to_string()),
            opt(self.alpha.map(|v| v.to_string())),
            Some(self.offline.to_string()),
            opt(self.p.map(|v| v.to_string())),
            Some(self.seed.to_string()),
            Some(self.order.to_string()),
            Some(self.derivative_mode.to_string()),
            Some(self.samples.to_string()),
            Some(self.rounding.to_string()),
            opt(self.tau.map(|v| v.to_string())),
            opt(self.tau_factor.map(|v| v.to_string())),
            opt(self.limit.map(|v| v.to_string())),
            Some(self.c_r.to_string()),
            opt(self.eps_prime.map(|v| v.to_string())),
        ];
        KEYS.iter()
            .zip(all)
            .filter_map(|(k, v)| v.map(|v| (*k, v)))
            .collect()
    }
}

fn field<T: FromStr>(line: usize, key: &str, value: &str) -> Result<T>
where
    T::Err: fmt::Display,
{
    value.parse().map_err(|e: T::Err| HarnessError::Config {
        line,
        message: format!("`{key}`: {e} (got `{value}`)"),
    })
}

/// `(line, key, value)` triples; rejects unknown and repeated keys.
fn parse_pairs(text: &str) -> Result<Vec<(usize, String, String)>> {
    let mut out: Vec<(usize, String, String)> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content.split_once('=').ok_or_else(|| HarnessError::Config {
            line,
            message: format!("expected `key = value`, got `{content}`"),
        })?;
        let (key, value) = (key.trim(), value.trim());
        if !KEYS.contains(&key) {
            return Err(HarnessError::UnknownKey(key.to_string()));
        }
        if out.iter().any(|(_, k, _)| k == key) {
            return Err(HarnessError::Config {
                line,
                message: format!("`{key}` set twice"),
            });
        }
        if value.is_empty() {
            return Err(HarnessError::Config {
                line,
                message: format!("`{key}` has no value"),
            });
        }
        out.push((line, key.to_string(), value.to_string()));
    }
    Ok(out)
}

/// Expands a sweep file: every key may hold a comma-separated list, and the
/// result is the Cartesian product in key order (later keys vary fastest).
pub fn parse_grid(text: &str) -> Result<Vec<RunConfig>> {
    let pairs = parse_pairs(text)?;
    let axes: Vec<(usize, &str, Vec<&str>)> = pairs
        .iter()
        .map(|(l, k, v)| (*l, k.as_str(), v.split(',').map(str::trim).collect()))
        .collect();
    if let Some((line, key, _)) = axes.iter().find(|(_, _, vs)| vs.iter().any(|v| v.is_empty())) {
        return Err(HarnessError::Config {
            line: *line,
            message: format!("`{key}` has an empty list entry"),
        });
    }
    let mut out = Vec::new();
    let mut idx = vec![0usize; axes.len()];
    loop {
        let combo = axes.iter().zip(&idx).map(|((l, k, vs), &i)| (*l, *k, vs[i]));
        out.push(RunConfig::from_pairs(combo)?);
        // Odometer increment, last axis fastest.
        let mut pos = axes.len();
        loop {
            if pos == 0 {
                return Ok(out);
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < axes[pos].2.len() {
                break;
            }
            idx[pos] = 0;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_gets_defaults() {
        let cfg = RunConfig::parse("algorithm = threshold\ndataset = hard:3:9\nk = 3\n").unwrap();
        assert_eq!(cfg.algorithm, Algorithm::Threshold);
        assert_eq!(cfg.epsilon, 0.2);
        assert_eq!(cfg.alpha(), 1.0);
        assert_eq!(cfg.order, Order::File);
    }

    #[test]
    fn comments_and_full_round_trip() {
        let text = "# sample\nalgorithm = extension-known-tau  # fractional\ndataset = modular:1:2:3\nk = 2\n\
                    epsilon = 0.4\np = 0.2\norder = shuffle:9\nrounding = swap\ntau = 3.5\nderivative_mode = exact\n";
        let cfg = RunConfig::parse(text).unwrap();
        assert_eq!(cfg.p, Some(0.2));
        assert_eq!(cfg.order, Order::Shuffle(9));
        assert_eq!(RunConfig::parse(&cfg.to_text()).unwrap(), cfg);
    }

    #[test]
    fn named_errors() {
        assert!(matches!(
            RunConfig::parse("algorithm = sieve\ndataset = x\nk = 1"),
            Err(HarnessError::UnknownAlgorithm(a)) if a == "sieve"
        ));
        assert!(matches!(
            RunConfig::parse("algorithm = greedy\ndataset = x\nk = 1\ncolour = red"),
            Err(HarnessError::UnknownKey(_))
        ));
        assert!(matches!(
            RunConfig::parse("algorithm = greedy\nk = 1"),
            Err(HarnessError::MissingKey("dataset"))
        ));
        assert!(matches!(
            RunConfig::parse("algorithm = greedy\ndataset = x\nk = two"),
            Err(HarnessError::Config { line: 3, .. })
        ));
    }

    #[test]
    fn grid_expands_in_key_order() {
        let grid = parse_grid("algorithm = threshold\ndataset = hard:3:9\nk = 2, 3\nepsilon = 0.1,0.2,0.4\n").unwrap();
        assert_eq!(grid.len(), 6);
        assert_eq!((grid[0].k, grid[0].epsilon), (2, 0.1));
        assert_eq!((grid[1].k, grid[1].epsilon), (2, 0.2));
        assert_eq!((grid[5].k, grid[5].epsilon), (3, 0.4));
    }

    #[test]
    fn one_point_grid_is_the_run_config() {
        let text = "algorithm = randomized\ndataset = hard:2:4\nk = 2\nseed = 5\n";
        assert_eq!(parse_grid(text).unwrap(), vec![RunConfig::parse(text).unwrap()]);
    }
}
