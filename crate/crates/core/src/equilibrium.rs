//! Closed-form symmetric equilibria.
//!
//! Without frictions every box plays `F*`: a continuous part
//! `(1 - a) (x / s)^(1/(n-1))` on `[0, s]` plus an atom `a` on 1. When
//! `mu < 1/n` the atom vanishes and `s = n mu`; otherwise `a` is the positive
//! root of `a = mu (1 - (1 - a)^n)` and `s = n (mu - a) / (1 - a)`.
//!
//! With frictions, full disclosure is the symmetric equilibrium exactly when
//! `mu >= 1 - (1/n)^(1/(n-1))`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::distributions::{DiscreteDistribution, StrategyGrid};
use crate::error::{Error, Result};

const BISECTION_ITERS: usize = 200;

fn check_market(n: usize, mu: f64) -> Result<()> {
    if n < 2 {
        return Err(Error::param(
            "n",
            n as f64,
            "at least two boxes are required",
        ));
    }
    if !(mu > 0.0 && mu < 1.0) {
        return Err(Error::param("mu", mu, "prior mean must lie in (0, 1)"));
    }
    Ok(())
}

/// `sum_{k<n} (1 - a)^k`, which equals `(1 - (1 - a)^n) / a` for `a > 0`.
fn geometric(n: usize, a: f64) -> f64 {
    let b = 1.0 - a;
    let mut term = 1.0;
    let mut sum = 0.0;
    for _ in 0..n {
        sum += term;
        term *= b;
    }
    sum
}

/// Residual `mu (1 - (1 - a)^n) - a` of the atom equation.
pub fn point_mass_residual(n: usize, mu: f64, a: f64) -> f64 {
    mu * (1.0 - (1.0 - a).powi(n as i32)) - a
}

/// Weight the frictionless equilibrium puts on 1.
///
/// Zero when `mu <= 1/n`. Otherwise the equation always has the spurious
/// root 0, so we bisect on `mu * sum_{k<n} (1 - a)^k - 1` instead: it is
/// the residual divided by `a`, strictly decreasing on `(0, mu]`, positive
/// at 0 and negative at `mu`.
pub fn solve_point_mass(n: usize, mu: f64) -> Result<f64> {
    check_market(n, mu)?;
    if n as f64 * mu <= 1.0 {
        return Ok(0.0);
    }
    let h = |a: f64| mu * geometric(n, a) - 1.0;
    let (mut lo, mut hi) = (0.0_f64, mu);
    for _ in 0..BISECTION_ITERS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if h(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Branch {
    /// `mu >= 1/n`: atom on 1 (zero exactly at `mu = 1/n`).
    HighMean,
    /// `mu < 1/n`: atomless on `[0, n mu]`.
    LowMean,
}

/// The frictionless symmetric equilibrium `F*`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrictionlessEquilibrium {
    pub n: usize,
    pub mu: f64,
    /// Atom on 1.
    pub a: f64,
    /// Upper end of the continuous part.
    pub s: f64,
    pub branch: Branch,
}

pub fn frictionless_equilibrium(n: usize, mu: f64) -> Result<FrictionlessEquilibrium> {
    check_market(n, mu)?;
    let nf = n as f64;
    let (branch, a, s) = if nf * mu >= 1.0 {
        let a = solve_point_mass(n, mu)?;
        (Branch::HighMean, a, nf * (mu - a) / (1.0 - a))
    } else {
        (Branch::LowMean, 0.0, nf * mu)
    };
    Ok(FrictionlessEquilibrium {
        n,
        mu,
        a,
        s: s.min(1.0),
        branch,
    })
}

impl FrictionlessEquilibrium {
    /// `n mu (1 - a)^(n-1)`; agrees with `s` whenever `a` solves the atom
    /// equation.
    pub fn support_bound_alt(&self) -> f64 {
        self.n as f64 * self.mu * (1.0 - self.a).powi(self.n as i32 - 1)
    }

    fn exponent(&self) -> f64 {
        1.0 / (self.n as f64 - 1.0)
    }

    /// `P(X <= x)`.
    pub fn cdf(&self, x: f64) -> f64 {
        if x < 0.0 {
            0.0
        } else if x >= 1.0 {
            1.0
        } else if x >= self.s {
            1.0 - self.a
        } else {
            (1.0 - self.a) * (x / self.s).powf(self.exponent())
        }
    }

    /// `E[X; l < X <= r]` over the continuous part only.
    fn partial_mean(&self, l: f64, r: f64) -> f64 {
        let (l, r) = (l.clamp(0.0, self.s), r.clamp(0.0, self.s));
        if r <= l {
            return 0.0;
        }
        let q = self.exponent();
        let scale = (1.0 - self.a) * q / (q + 1.0);
        scale * self.s * ((r / self.s).powf(q + 1.0) - (l / self.s).powf(q + 1.0))
    }

    /// Analytic mean, `a + (1 - a) s / n`.
    pub fn mean(&self) -> f64 {
        self.a + (1.0 - self.a) * self.s / self.n as f64
    }

    /// Inverse-CDF draw from a uniform `u` in `[0, 1)`.
    pub fn quantile(&self, u: f64) -> f64 {
        if u < 1.0 - self.a {
            self.s * (u / (1.0 - self.a)).powi(self.n as i32 - 1)
        } else {
            1.0
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.quantile(rng.gen())
    }
}

/// `F*(x)`.
pub fn equilibrium_cdf(eq: &FrictionlessEquilibrium, x: f64) -> f64 {
    eq.cdf(x)
}

/// One seeded draw from `F*`.
pub fn equilibrium_sample(eq: &FrictionlessEquilibrium, seed: u64) -> f64 {
    eq.sample(&mut ChaCha8Rng::seed_from_u64(seed))
}

/// Projects `F*` onto a grid.
///
/// The continuous mass of each cell `[p_j, p_{j+1}]` is split between its two
/// endpoints so that the cell's conditional mean is kept; the atom on 1 is
/// carried over as is. Float drift in the mean is then removed by moving
/// mass between the nearest charged grid points on either side of `mu`.
pub fn discretize_equilibrium(
    eq: &FrictionlessEquilibrium,
    grid: &StrategyGrid,
) -> Result<DiscreteDistribution> {
    if (grid.mu() - eq.mu).abs() > 1e-12 {
        return Err(Error::Precondition(format!(
            "grid mean {} differs from equilibrium mean {}",
            grid.mu(),
            eq.mu
        )));
    }
    let pts = grid.points();
    let mut weights = vec![0.0; pts.len()];
    for j in 0..pts.len() - 1 {
        let (l, r) = (pts[j], pts[j + 1]);
        if l >= eq.s {
            break;
        }
        let mass = eq.cdf(r.min(eq.s)) - eq.cdf(l);
        if mass <= 0.0 {
            continue;
        }
        let cond = eq.partial_mean(l, r) / mass;
        let to_r = ((cond - l) / (r - l)).clamp(0.0, 1.0);
        weights[j] += mass * (1.0 - to_r);
        weights[j + 1] += mass * to_r;
    }
    let last = weights.len() - 1;
    weights[last] += eq.a;

    let mean: f64 = pts.iter().zip(&weights).map(|(x, w)| x * w).sum();
    let drift = eq.mu - mean;
    if drift != 0.0 {
        // nearest charged points on either side of mu; the continuous part
        // can end below mu, leaving the grid neighbours of mu empty
        let lo = (0..pts.len())
            .rev()
            .find(|&j| pts[j] <= eq.mu && weights[j] > 0.0);
        let hi = (0..pts.len()).find(|&j| pts[j] > eq.mu && weights[j] > 0.0);
        let (Some(lo), Some(hi)) = (lo, hi) else {
            return Err(Error::Precondition(format!(
                "cannot correct mean drift {drift} on this grid"
            )));
        };
        let shift = drift / (pts[hi] - pts[lo]);
        if (shift > 0.0 && weights[lo] < shift) || (shift < 0.0 && weights[hi] < -shift) {
            return Err(Error::Precondition(format!(
                "cannot correct mean drift {drift} on this grid"
            )));
        }
        weights[lo] -= shift;
        weights[hi] += shift;
    }
    let total: f64 = weights.iter().sum();
    let weights = weights.into_iter().map(|w| w / total).collect();
    DiscreteDistribution::new(pts.to_vec(), weights)
}

/// `1 - (1/n)^(1/(n-1))`.
pub fn frictions_threshold(n: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::param(
            "n",
            n as f64,
            "at least two boxes are required",
        ));
    }
    let nf = n as f64;
    Ok(1.0 - (1.0 / nf).powf(1.0 / (nf - 1.0)))
}

/// Whether full disclosure is the symmetric equilibrium with frictions.
/// The threshold itself counts.
pub fn full_info_is_equilibrium(n: usize, mu: f64) -> Result<bool> {
    check_market(n, mu)?;
    Ok(mu >= frictions_threshold(n)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StaticsRow {
    pub n: usize,
    pub a: f64,
    pub s: f64,
}

/// `(n, a, s)` along a range of market sizes.
pub fn comparative_statics(
    mu: f64,
    n_range: impl IntoIterator<Item = usize>,
) -> Result<Vec<StaticsRow>> {
    n_range
        .into_iter()
        .map(|n| {
            let eq = frictionless_equilibrium(n, mu)?;
            Ok(StaticsRow {
                n,
                a: eq.a,
                s: eq.s,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn atom_at_the_branch_boundary_is_zero() {
        assert_eq!(solve_point_mass(2, 0.5).unwrap(), 0.0);
        assert_eq!(solve_point_mass(4, 0.2).unwrap(), 0.0);
    }

    #[test]
    fn atom_for_three_boxes() {
        // dividing the residual by a leaves a^2 - 3a + 1 = 0
        let a = solve_point_mass(3, 0.5).unwrap();
        let root = (3.0 - 5f64.sqrt()) / 2.0;
        assert!((a - root).abs() < 1e-14);
        assert!(point_mass_residual(3, 0.5, a).abs() < 1e-15);
    }

    #[test]
    fn atom_just_above_boundary_is_small_and_positive() {
        let a = solve_point_mass(2, 0.5 + 1e-9).unwrap();
        assert!(a > 0.0 && a < 1e-8);
        assert!(point_mass_residual(2, 0.5 + 1e-9, a).abs() < 1e-15);
    }

    #[test]
    fn uniform_case() {
        let eq = frictionless_equilibrium(2, 0.5).unwrap();
        assert_eq!(eq.a, 0.0);
        assert_eq!(eq.s, 1.0);
        assert_eq!(eq.branch, Branch::HighMean);
        assert!((eq.cdf(0.3) - 0.3).abs() < 1e-15);
        assert_eq!(eq.cdf(1.0), 1.0);
    }

    #[test]
    fn low_mean_branch() {
        let eq = frictionless_equilibrium(2, 0.25).unwrap();
        assert_eq!(eq.branch, Branch::LowMean);
        assert_eq!(eq.s, 0.5);
        assert!((eq.cdf(0.2) - 0.4).abs() < 1e-15);
        assert_eq!(eq.cdf(0.5), 1.0);
        assert!((eq.mean() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn three_box_equilibrium() {
        let eq = frictionless_equilibrium(3, 0.5).unwrap();
        assert!((eq.a - 0.3819660).abs() < 1e-7);
        assert!((eq.s - 0.5729490).abs() < 1e-7);
        assert!((eq.s - eq.support_bound_alt()).abs() < 1e-12);
        assert!((eq.mean() - 0.5).abs() < 1e-12);
        assert!((eq.cdf(eq.s) - (1.0 - eq.a)).abs() < 1e-15);
        assert!((eq.cdf(0.99) - (1.0 - eq.a)).abs() < 1e-15);
    }

    #[test]
    fn quantile_inverts_cdf() {
        let eq = frictionless_equilibrium(4, 0.45).unwrap();
        for u in [0.0, 0.1, 0.3, 0.5] {
            let x = eq.quantile(u);
            assert!((eq.cdf(x) - u).abs() < 1e-12);
        }
        assert_eq!(eq.quantile(0.999), 1.0);
        let x = equilibrium_sample(&eq, 3);
        assert!((0.0..=1.0).contains(&x));
    }

    #[test]
    fn market_preconditions() {
        assert!(frictionless_equilibrium(1, 0.5).is_err());
        assert!(frictionless_equilibrium(3, 1.0).is_err());
        assert!(solve_point_mass(3, 0.0).is_err());
        assert!(frictions_threshold(1).is_err());
    }

    #[test]
    fn thresholds() {
        assert_eq!(frictions_threshold(2).unwrap(), 0.5);
        let t3 = frictions_threshold(3).unwrap();
        assert!((t3 - (1.0 - 3f64.powf(-0.5))).abs() < 1e-15);
        assert!((t3 - 0.4226497).abs() < 1e-7);
        assert!(!full_info_is_equilibrium(2, 0.4).unwrap());
        assert!(full_info_is_equilibrium(2, 0.6).unwrap());
        assert!(full_info_is_equilibrium(2, 0.5).unwrap());
    }

    #[test]
    fn statics_table() {
        let rows = comparative_statics(0.5, 2..=3).unwrap();
        assert_eq!(
            rows[0],
            StaticsRow {
                n: 2,
                a: 0.0,
                s: 1.0
            }
        );
        assert!(rows[1].a > 0.0 && rows[1].s < 1.0);
        assert!((rows[1].s - 0.5729).abs() < 1e-4);
    }

    #[test]
    fn discretized_uniform_weights() {
        let eq = frictionless_equilibrium(2, 0.5).unwrap();
        let grid = StrategyGrid::uniform(11, 0.5).unwrap();
        let d = discretize_equilibrium(&eq, &grid).unwrap();
        assert_eq!(d.len(), 11);
        for (k, &w) in d.weights().iter().enumerate() {
            let expected = if k == 0 || k == 10 { 0.05 } else { 0.1 };
            assert!((w - expected).abs() < 1e-12, "cell {k}: {w}");
        }
        assert!((d.mean() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn discretized_atom_is_preserved() {
        let eq = frictionless_equilibrium(3, 0.5).unwrap();
        let grid = StrategyGrid::uniform(101, 0.5).unwrap();
        let d = discretize_equilibrium(&eq, &grid).unwrap();
        assert!((d.weight_at(1.0) - eq.a).abs() < 1e-12);
        assert!((d.mean() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn discretize_rejects_other_mean() {
        let eq = frictionless_equilibrium(3, 0.5).unwrap();
        let grid = StrategyGrid::uniform(11, 0.4).unwrap();
        assert!(discretize_equilibrium(&eq, &grid).is_err());
    }

    #[test]
    fn discretize_when_continuous_part_ends_below_mean() {
        // for n = 2 the continuous part stops at s < mu once mu > 2/3
        let mu = 0.6774947789434765;
        let eq = frictionless_equilibrium(2, mu).unwrap();
        assert!(eq.s < mu);
        let d = discretize_equilibrium(&eq, &StrategyGrid::uniform(70, mu).unwrap()).unwrap();
        assert!((d.mean() - mu).abs() <= 1e-12);
    }
}
