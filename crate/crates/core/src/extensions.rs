//! Multilinear extension `F` and Lovász extension `f̂`.
//!
//! `F(x) = E[f(R(x))]` where `R(x)` contains each `e` independently with
//! probability `x_e`. `f̂(x) = E_θ[f({e : x_e >= θ})]` for `θ ~ U[0, 1]`.

use std::collections::BTreeMap;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::oracle::{ElementId, Oracle};

/// Largest number of strictly fractional coordinates enumerated exactly.
pub const EXACT_CAP: usize = 20;

/// A point of `[0,1]^N`, stored sparsely. Unstored coordinates are zero.
#[derive(Debug, Clone, PartialEq)]
pub struct FractionalPoint {
    n: usize,
    coords: BTreeMap<ElementId, f64>,
}

impl FractionalPoint {
    pub fn zeros(n: usize) -> Self {
        FractionalPoint {
            n,
            coords: BTreeMap::new(),
        }
    }

    pub fn indicator(n: usize, set: &[ElementId]) -> Result<Self> {
        let mut x = Self::zeros(n);
        for &e in set {
            x.set(e, 1.0)?;
        }
        Ok(x)
    }

    pub fn from_dense(values: &[f64]) -> Result<Self> {
        let mut x = Self::zeros(values.len());
        for (i, &v) in values.iter().enumerate() {
            x.set(ElementId(i), v)?;
        }
        Ok(x)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, e: ElementId) -> f64 {
        self.coords.get(&e).copied().unwrap_or(0.0)
    }

    /// Sets `x_e = value`; zero removes the coordinate.
    pub fn set(&mut self, e: ElementId, value: f64) -> Result<()> {
        if e.0 >= self.n {
            return Err(Error::OutOfRange { id: e, n: self.n });
        }
        if !(0.0..=1.0).contains(&value) {
            return Err(Error::CoordinateOutOfRange { id: e, value });
        }
        if value == 0.0 {
            self.coords.remove(&e);
        } else {
            self.coords.insert(e, value);
        }
        Ok(())
    }

    /// Non-zero coordinates in increasing id order.
    pub fn iter(&self) -> impl Iterator<Item = (ElementId, f64)> + '_ {
        self.coords.iter().map(|(&e, &v)| (e, v))
    }

    pub fn support(&self) -> Vec<ElementId> {
        self.coords.keys().copied().collect()
    }

    pub fn support_len(&self) -> usize {
        self.coords.len()
    }

    pub fn norm1(&self) -> f64 {
        self.coords.values().sum()
    }

    pub fn is_integral(&self) -> bool {
        self.coords.values().all(|&v| v == 1.0)
    }

    /// `x ∨ 1_e`.
    pub fn raised(&self, e: ElementId) -> Self {
        let mut y = self.clone();
        y.coords.insert(e, 1.0);
        y
    }

    /// `x ∧ 1_{N∖{e}}`.
    pub fn lowered(&self, e: ElementId) -> Self {
        let mut y = self.clone();
        y.coords.remove(&e);
        y
    }

    /// `c·x` for `c ∈ [0, 1]`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&c) {
            return Err(Error::InvalidParameter(format!("scale {c} outside [0, 1]")));
        }
        let mut y = Self::zeros(self.n);
        for (e, v) in self.iter() {
            y.set(e, v * c)?;
        }
        Ok(y)
    }

    /// `c·x + (1-c)·y`.
    pub fn convex_combination(&self, other: &Self, c: f64) -> Result<Self> {
        self.check_same_size(other)?;
        let mut z = Self::zeros(self.n);
        for e in self.coords.keys().chain(other.coords.keys()) {
            let v = c * self.get(*e) + (1.0 - c) * other.get(*e);
            z.set(*e, v.clamp(0.0, 1.0))?;
        }
        Ok(z)
    }

    /// Coordinate-wise sum; fails if any coordinate exceeds 1.
    pub fn sum(&self, other: &Self) -> Result<Self> {
        self.check_same_size(other)?;
        let mut z = self.clone();
        for (e, v) in other.iter() {
            z.set(e, self.get(e) + v)?;
        }
        Ok(z)
    }

    fn check_same_size(&self, other: &Self) -> Result<()> {
        if self.n != other.n {
            return Err(Error::SizeMismatch {
                expected: self.n,
                found: other.n,
            });
        }
        Ok(())
    }

    /// Splits the support into coordinates equal to one and strictly
    /// fractional ones.
    pub(crate) fn split_integral(&self) -> (Vec<ElementId>, Vec<(ElementId, f64)>) {
        let mut ones = Vec::new();
        let mut frac = Vec::new();
        for (e, v) in self.iter() {
            if v >= 1.0 {
                ones.push(e);
            } else {
                frac.push((e, v));
            }
        }
        (ones, frac)
    }
}

/// A Monte Carlo estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
    pub samples: usize,
}

impl Estimate {
    /// An exactly computed value.
    pub fn exact(value: f64) -> Self {
        Estimate {
            mean: value,
            stderr: 0.0,
            samples: 1,
        }
    }

    pub fn from_samples(values: &[f64]) -> Self {
        let count = values.len();
        let mean = values.iter().sum::<f64>() / count as f64;
        let stderr = if count > 1 {
            let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (count - 1) as f64;
            (var / count as f64).sqrt()
        } else {
            0.0
        };
        Estimate {
            mean,
            stderr,
            samples: count,
        }
    }
}

/// Exact `F(x)` by enumerating the strictly fractional coordinates.
pub fn multilinear_exact(oracle: &Oracle, x: &FractionalPoint) -> Result<f64> {
    check_point(oracle, x)?;
    let (ones, frac) = x.split_integral();
    if frac.len() > EXACT_CAP {
        return Err(Error::ExactCapExceeded {
            found: frac.len(),
            cap: EXACT_CAP,
        });
    }
    let mut total = 0.0;
    let mut set = Vec::with_capacity(ones.len() + frac.len());
    for mask in 0u64..(1u64 << frac.len()) {
        let mut prob = 1.0;
        set.clear();
        set.extend_from_slice(&ones);
        for (bit, &(e, v)) in frac.iter().enumerate() {
            if mask >> bit & 1 == 1 {
                prob *= v;
                set.push(e);
            } else {
                prob *= 1.0 - v;
            }
        }
        total += prob * oracle.evaluate(&set)?;
    }
    Ok(total)
}

fn draw(x: &FractionalPoint, rng: &mut impl Rng, out: &mut Vec<ElementId>) {
    out.clear();
    for (e, v) in x.iter() {
        if v >= 1.0 || rng.gen::<f64>() < v {
            out.push(e);
        }
    }
}

/// Sampled `F(x)`, deterministic given `seed`.
pub fn multilinear_sample(
    oracle: &Oracle,
    x: &FractionalPoint,
    samples: usize,
    seed: u64,
) -> Result<Estimate> {
    check_point(oracle, x)?;
    if samples == 0 {
        return Err(Error::InvalidParameter("samples must be >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut set = Vec::new();
    let mut values = Vec::with_capacity(samples);
    for _ in 0..samples {
        draw(x, &mut rng, &mut set);
        values.push(oracle.evaluate(&set)?);
    }
    Ok(Estimate::from_samples(&values))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DerivativeMode {
    Exact,
    Sampled { samples: usize, seed: u64 },
}

impl DerivativeMode {
    /// Exact for `n <= EXACT_CAP`, otherwise sampled with the given budget.
    pub fn default_for(n: usize, samples: usize, seed: u64) -> Self {
        if n <= EXACT_CAP {
            DerivativeMode::Exact
        } else {
            DerivativeMode::Sampled { samples, seed }
        }
    }
}

/// `∂_e F(x) = F(x ∨ 1_e) - F(x ∧ 1_{N∖{e}})`.
///
/// Sampled mode draws each `R` once and evaluates both `R ∪ {e}` and
/// `R ∖ {e}` on it (common random numbers).
pub fn partial_derivative(
    oracle: &Oracle,
    x: &FractionalPoint,
    e: ElementId,
    mode: DerivativeMode,
) -> Result<Estimate> {
    if e.0 >= oracle.n() {
        return Err(Error::OutOfRange { id: e, n: oracle.n() });
    }
    let rest = x.lowered(e);
    match mode {
        DerivativeMode::Exact => {
            let high = multilinear_exact(oracle, &rest.raised(e))?;
            let low = multilinear_exact(oracle, &rest)?;
            Ok(Estimate::exact(high - low))
        }
        DerivativeMode::Sampled { samples, seed } => {
            check_point(oracle, x)?;
            if samples == 0 {
                return Err(Error::InvalidParameter("samples must be >= 1".into()));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut set = Vec::new();
            let mut diffs = Vec::with_capacity(samples);
            for _ in 0..samples {
                draw(&rest, &mut rng, &mut set);
                let low = oracle.evaluate(&set)?;
                let high = oracle.evaluate_with(&set, e)?;
                diffs.push(high - low);
            }
            Ok(Estimate::from_samples(&diffs))
        }
    }
}

/// Exact Lovász extension via level sets: one evaluation per distinct
/// non-zero coordinate value plus `f(∅)`.
pub fn lovasz(oracle: &Oracle, x: &FractionalPoint) -> Result<f64> {
    check_point(oracle, x)?;
    let mut entries: Vec<(ElementId, f64)> = x.iter().collect();
    entries.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));

    let mut total = 0.0;
    let mut upper = 1.0;
    let mut level: Vec<ElementId> = Vec::with_capacity(entries.len());
    let mut i = 0;
    while i < entries.len() {
        let theta = entries[i].1;
        // Between theta and the previous level the level set is unchanged.
        let below = oracle.evaluate(&level)?;
        total += (upper - theta) * below;
        while i < entries.len() && entries[i].1 == theta {
            level.push(entries[i].0);
            i += 1;
        }
        upper = theta;
    }
    total += upper * oracle.evaluate(&level)?;
    Ok(total)
}

fn check_point(oracle: &Oracle, x: &FractionalPoint) -> Result<()> {
    if x.n() != oracle.n() {
        return Err(Error::SizeMismatch {
            expected: oracle.n(),
            found: x.n(),
        });
    }
    Ok(())
}
