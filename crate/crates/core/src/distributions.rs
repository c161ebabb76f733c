//! Finite distributions on `[0, 1]`.
//!
//! A box's pure strategy under a binary prior is any distribution of
//! posterior means on `[0, 1]` with the prior mean. Every strategy, prior and
//! garbling in this crate is a [`DiscreteDistribution`]; the continuous
//! frictionless equilibrium is only ever handled analytically or through a
//! grid discretization.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Support points closer than this are treated as one atom.
pub const MERGE_TOL: f64 = 1e-12;

/// Allowed deviation of the total weight from one.
pub const WEIGHT_SUM_TOL: f64 = 1e-12;

/// A probability distribution with finitely many atoms in `[0, 1]`.
///
/// The support is strictly increasing and every stored weight is positive.
/// Values are immutable after construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawDistribution")]
pub struct DiscreteDistribution {
    support: Vec<f64>,
    weights: Vec<f64>,
}

#[derive(Deserialize)]
struct RawDistribution {
    support: Vec<f64>,
    weights: Vec<f64>,
}

impl TryFrom<RawDistribution> for DiscreteDistribution {
    type Error = Error;

    fn try_from(raw: RawDistribution) -> Result<Self> {
        DiscreteDistribution::new(raw.support, raw.weights)
    }
}

impl DiscreteDistribution {
    /// Builds a distribution from parallel support/weight vectors.
    ///
    /// The input need not be sorted. Zero-weight atoms are pruned and points
    /// within [`MERGE_TOL`] of each other are merged at their barycenter.
    pub fn new(support: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if support.len() != weights.len() {
            return Err(Error::InvalidDistribution(format!(
                "support has {} points but {} weights were given",
                support.len(),
                weights.len()
            )));
        }
        if support.is_empty() {
            return Err(Error::InvalidDistribution("empty support".into()));
        }
        for &x in &support {
            if !x.is_finite() || !(-MERGE_TOL..=1.0 + MERGE_TOL).contains(&x) {
                return Err(Error::InvalidDistribution(format!(
                    "support point {x} outside [0, 1]"
                )));
            }
        }
        for &w in &weights {
            if !w.is_finite() || w < 0.0 {
                return Err(Error::InvalidDistribution(format!(
                    "weight {w} is negative or not finite"
                )));
            }
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::InvalidDistribution(format!(
                "weights sum to {total}, not 1"
            )));
        }
        let mut atoms: Vec<(f64, f64)> = support
            .into_iter()
            .map(|x| x.clamp(0.0, 1.0))
            .zip(weights)
            .collect();
        Ok(Self::from_atoms_unchecked(&mut atoms))
    }

    /// Sorts, merges and prunes; callers guarantee validity of the atoms.
    fn from_atoms_unchecked(atoms: &mut [(f64, f64)]) -> Self {
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut support: Vec<f64> = Vec::with_capacity(atoms.len());
        let mut weights: Vec<f64> = Vec::with_capacity(atoms.len());
        for &(x, w) in atoms.iter() {
            if w <= 0.0 {
                continue;
            }
            match (support.last_mut(), weights.last_mut()) {
                (Some(px), Some(pw)) if (x - *px).abs() <= MERGE_TOL => {
                    let merged = *pw + w;
                    if x != *px {
                        *px = ((*px * *pw + x * w) / merged).clamp(0.0, 1.0);
                    }
                    *pw = merged;
                }
                _ => {
                    support.push(x);
                    weights.push(w);
                }
            }
        }
        Self { support, weights }
    }

    pub fn point_mass(x: f64) -> Result<Self> {
        Self::new(vec![x], vec![1.0])
    }

    pub fn support(&self) -> &[f64] {
        &self.support
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Number of atoms.
    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    /// Iterates over `(location, weight)` pairs in increasing location order.
    pub fn atoms(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.support
            .iter()
            .copied()
            .zip(self.weights.iter().copied())
    }

    pub fn mean(&self) -> f64 {
        self.atoms().map(|(x, w)| x * w).sum()
    }

    pub fn min(&self) -> f64 {
        self.support[0]
    }

    pub fn max(&self) -> f64 {
        self.support[self.support.len() - 1]
    }

    /// `P(X <= x)`.
    pub fn cdf(&self, x: f64) -> f64 {
        self.atoms()
            .take_while(|&(s, _)| s <= x)
            .map(|(_, w)| w)
            .sum()
    }

    /// Weight of the atom within [`MERGE_TOL`] of `x`, or zero.
    pub fn weight_at(&self, x: f64) -> f64 {
        self.atoms()
            .find(|&(s, _)| (s - x).abs() <= MERGE_TOL)
            .map_or(0.0, |(_, w)| w)
    }

    /// `E[f(X)]`.
    pub fn expect(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.atoms().map(|(x, w)| w * f(x)).sum()
    }

    /// Draws one realization by inverting the CDF.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        for (x, w) in self.atoms() {
            acc += w;
            if u < acc {
                return x;
            }
        }
        self.max()
    }

    /// Merges a fraction of atom `i` and a fraction of atom `j` into their
    /// barycenter.
    ///
    /// This is one elementary fusion step: the result is a mean-preserving
    /// contraction of `self`. `take_i` and `take_j` are fractions in
    /// `[0, 1]` of each atom's weight.
    pub fn fuse(&self, i: usize, j: usize, take_i: f64, take_j: f64) -> Result<Self> {
        if i >= self.len() || j >= self.len() || i == j {
            return Err(Error::InvalidDistribution(format!(
                "cannot fuse atoms {i} and {j} of a {}-atom distribution",
                self.len()
            )));
        }
        for (name, t) in [("take_i", take_i), ("take_j", take_j)] {
            if !(0.0..=1.0).contains(&t) {
                return Err(Error::param(name, t, "fraction must lie in [0, 1]"));
            }
        }
        let qi = self.weights[i] * take_i;
        let qj = self.weights[j] * take_j;
        if qi + qj <= 0.0 {
            return Ok(self.clone());
        }
        let bary = ((qi * self.support[i] + qj * self.support[j]) / (qi + qj)).clamp(0.0, 1.0);
        let mut atoms: Vec<(f64, f64)> = self.atoms().collect();
        atoms[i].1 -= qi;
        atoms[j].1 -= qj;
        atoms.push((bary, qi + qj));
        Ok(Self::from_atoms_unchecked(&mut atoms))
    }

    /// Replaces the weights by `weights` on the same support; used by
    /// constructions that perturb an existing strategy.
    pub(crate) fn from_parts_unchecked(support: Vec<f64>, weights: Vec<f64>) -> Self {
        let mut atoms: Vec<(f64, f64)> = support.into_iter().zip(weights).collect();
        Self::from_atoms_unchecked(&mut atoms)
    }
}

/// A Bernoulli prior over prize quality `{0, 1}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinaryPrior {
    mu: f64,
}

impl BinaryPrior {
    pub fn new(mu: f64) -> Result<Self> {
        if !(mu > 0.0 && mu < 1.0) {
            return Err(Error::param("mu", mu, "prior mean must lie in (0, 1)"));
        }
        Ok(Self { mu })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    /// The prior itself as a strategy: full disclosure.
    pub fn distribution(&self) -> DiscreteDistribution {
        binary_prior_distribution(*self)
    }
}

/// Support `{0, 1}` with weights `[1 - mu, mu]`.
pub fn binary_prior_distribution(prior: BinaryPrior) -> DiscreteDistribution {
    DiscreteDistribution::from_parts_unchecked(vec![0.0, 1.0], vec![1.0 - prior.mu, prior.mu])
}

/// The unique distribution on `{x_lo, x_hi}` with mean `mu`.
///
/// When `mu` equals an endpoint the result is a point mass there.
pub fn two_point(mu: f64, x_lo: f64, x_hi: f64) -> Result<DiscreteDistribution> {
    if !(0.0..=1.0).contains(&x_lo) || !(0.0..=1.0).contains(&x_hi) || x_lo > x_hi {
        return Err(Error::InvalidDistribution(format!(
            "two-point support [{x_lo}, {x_hi}] is not an ordered pair in [0, 1]"
        )));
    }
    if !(x_lo..=x_hi).contains(&mu) {
        return Err(Error::param(
            "mu",
            mu,
            format!("mean outside the two-point support [{x_lo}, {x_hi}]"),
        ));
    }
    if mu - x_lo <= MERGE_TOL || x_hi - mu <= MERGE_TOL {
        return DiscreteDistribution::point_mass(mu);
    }
    let span = x_hi - x_lo;
    let w_hi = (mu - x_lo) / span;
    Ok(DiscreteDistribution::from_parts_unchecked(
        vec![x_lo, x_hi],
        vec![1.0 - w_hi, w_hi],
    ))
}

/// A seeded chain of `steps` random fusions of `d`.
///
/// Each step picks two distinct atoms and merges either all of both (with
/// probability one half) or random fractions of each into their barycenter.
/// The chain stops early once a single atom remains.
pub fn random_garbling(d: &DiscreteDistribution, seed: u64, steps: usize) -> DiscreteDistribution {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut current = d.clone();
    for _ in 0..steps {
        let len = current.len();
        if len < 2 {
            break;
        }
        let i = rng.gen_range(0..len);
        let mut j = rng.gen_range(0..len - 1);
        if j >= i {
            j += 1;
        }
        let (ti, tj) = if rng.gen_bool(0.5) {
            (1.0, 1.0)
        } else {
            (rng.gen_range(0.0..=1.0), rng.gen_range(0.0..=1.0))
        };
        current = current
            .fuse(i, j, ti, tj)
            .expect("indices and fractions are in range");
    }
    current
}

/// A finite grid over `[0, 1]` on which strategies are discretized.
///
/// Always contains `0`, `1` and the target mean exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct StrategyGrid {
    points: Vec<f64>,
    mu: f64,
}

impl StrategyGrid {
    /// `m` uniformly spaced points plus `mu`.
    ///
    /// A uniform point within [`MERGE_TOL`] of `mu` is replaced by `mu`
    /// itself, so the grid has `m` or `m + 1` points.
    pub fn uniform(m: usize, mu: f64) -> Result<Self> {
        if m < 2 {
            return Err(Error::param("m", m as f64, "grid needs at least 2 points"));
        }
        if !(mu > 0.0 && mu < 1.0) {
            return Err(Error::param("mu", mu, "grid mean must lie in (0, 1)"));
        }
        let denom = (m - 1) as f64;
        let mut points: Vec<f64> = (0..m).map(|k| k as f64 / denom).collect();
        match points.iter().position(|&p| (p - mu).abs() <= MERGE_TOL) {
            Some(k) => points[k] = mu,
            None => {
                let at = points.partition_point(|&p| p < mu);
                points.insert(at, mu);
            }
        }
        Ok(Self { points, mu })
    }

    /// Validates an explicit grid.
    pub fn from_points(points: Vec<f64>, mu: f64) -> Result<Self> {
        if points.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidDistribution(
                "grid points must be strictly increasing".into(),
            ));
        }
        if points.first() != Some(&0.0) || points.last() != Some(&1.0) {
            return Err(Error::Precondition(
                "grid missing anchor points 0 and 1".into(),
            ));
        }
        if !points.contains(&mu) {
            return Err(Error::Precondition(format!(
                "grid missing anchor point mu = {mu}"
            )));
        }
        Ok(Self { points, mu })
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Largest gap between consecutive points.
    pub fn step(&self) -> f64 {
        self.points
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(0.0, f64::max)
    }

    /// Index of the point equal to `mu`.
    pub fn mu_index(&self) -> usize {
        self.points
            .iter()
            .position(|&p| p == self.mu)
            .expect("grid always contains mu")
    }

    /// Smallest grid point strictly above `x`.
    pub fn next_above(&self, x: f64) -> Option<f64> {
        let k = self.points.partition_point(|&p| p <= x);
        self.points.get(k).copied()
    }

    /// The union of two grids with the same mean.
    pub fn union(&self, other: &StrategyGrid) -> Result<Self> {
        let mut points: Vec<f64> = self
            .points
            .iter()
            .chain(other.points.iter())
            .copied()
            .collect();
        points.sort_by(f64::total_cmp);
        points.dedup_by(|a, b| (*a - *b).abs() <= MERGE_TOL);
        Self::from_points(points, self.mu)
    }
}
