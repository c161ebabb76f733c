//! Pandora's Rule over boxes with arbitrary discrete strategies.
//!
//! Boxes are indexed by a reservation price `z` solving
//! `z = -c + beta * E[max(X, z)]`. Pandora opens the unopened box with the
//! highest `z` (uniformly among ties), pays `c` per inspection, discounts by
//! `beta` per period, and stops once her best sampled reward beats every
//! remaining `z`. On stopping she selects uniformly among the opened boxes
//! holding the best reward. Rewards are non-negative and no `z` falls below
//! the outside option 0, so some box is always opened and selected: box
//! payoffs sum to one.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distributions::DiscreteDistribution;
use crate::error::{Error, Result};
use crate::parallel;

/// Reservation prices (and sampled rewards) closer than this are ties.
pub const TIE_TOL: f64 = 1e-12;

/// Default budget of weighted branches for [`exact_outcome`].
pub const DEFAULT_BRANCH_LIMIT: u64 = 10_000_000;

const BISECTION_ITERS: usize = 200;

/// Paths per Monte Carlo shard; shard `k` draws from ChaCha stream `k`.
const SHARD_PATHS: usize = 1 << 15;

/// Reservation price of a single box.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReservationPrice {
    pub value: f64,
    /// False when the indifference equation holds on a whole interval and
    /// the smallest root (the top of the support) was taken, which happens
    /// exactly in the frictionless regime.
    pub attained: bool,
}

fn check_frictions(beta: f64, cost: f64) -> Result<()> {
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(Error::param("beta", beta, "discount must lie in (0, 1]"));
    }
    if !cost.is_finite() || cost < 0.0 {
        return Err(Error::param("cost", cost, "inspection cost must be >= 0"));
    }
    Ok(())
}

fn is_frictionless(beta: f64, cost: f64) -> bool {
    beta == 1.0 && cost == 0.0
}

/// Smallest root on `[0, 1]` of `g(z) = -c + beta * E[max(X, z)] - z`.
///
/// `g` is continuous and non-increasing, so bisection brackets the smallest
/// root; the bracket is then polished with the exact root of the linear
/// piece of `g` it lands on.
pub fn reservation_price(
    d: &DiscreteDistribution,
    beta: f64,
    cost: f64,
) -> Result<ReservationPrice> {
    check_frictions(beta, cost)?;
    if is_frictionless(beta, cost) {
        return Ok(ReservationPrice {
            value: d.max(),
            attained: false,
        });
    }
    let mean = d.mean();
    if beta * mean <= cost {
        return Err(Error::Precondition(format!(
            "searching a box with mean {mean} is not worthwhile: beta * mean = {} <= cost = {cost}",
            beta * mean
        )));
    }
    let g = |z: f64| -cost + beta * d.expect(|x| x.max(z)) - z;
    if g(1.0) > 0.0 {
        return Err(Error::NoRoot { beta, cost });
    }
    // Invariant: g(lo) > 0 >= g(hi).
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    for _ in 0..BISECTION_ITERS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    // On (x_prev, x_next] with x_prev <= lo < x_next, g is
    // -c + beta * (below * z + upper) - z.
    let below: f64 = d.atoms().filter(|&(x, _)| x <= lo).map(|(_, w)| w).sum();
    let upper: f64 = d.atoms().filter(|&(x, _)| x > lo).map(|(x, w)| x * w).sum();
    let slope = 1.0 - beta * below;
    let mut value = hi;
    if slope > 0.0 {
        let exact = (beta * upper - cost) / slope;
        if exact >= lo - 1e-9 && exact <= hi + 1e-9 {
            value = exact.clamp(0.0, 1.0);
        }
    }
    Ok(ReservationPrice {
        value,
        attained: true,
    })
}

/// Closed-form reservation price of the full-disclosure strategy under a
/// binary prior: `(beta * mu - c) / (1 - beta * (1 - mu))`.
pub fn reservation_price_binary(mu: f64, beta: f64, cost: f64) -> Result<f64> {
    check_frictions(beta, cost)?;
    if !(mu > 0.0 && mu < 1.0) {
        return Err(Error::param("mu", mu, "prior mean must lie in (0, 1)"));
    }
    if beta * mu <= cost {
        return Err(Error::param(
            "cost",
            cost,
            format!(
                "search is not worthwhile: beta * mu = {} <= cost",
                beta * mu
            ),
        ));
    }
    Ok((beta * mu - cost) / (1.0 - beta * (1.0 - mu)))
}

/// How Pandora resolves a remaining reservation price equal to her best
/// sampled reward.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopTieRule {
    /// Keep searching; with zero frictions this reproduces the static
    /// highest-realization game with fair ties exactly.
    #[default]
    ContinueOnTie,
    /// Stop as soon as no remaining reservation price strictly exceeds
    /// the best sampled reward.
    StopOnTie,
}

impl StopTieRule {
    fn should_stop(self, zmax: f64, w: f64) -> bool {
        match self {
            StopTieRule::ContinueOnTie => zmax < w - TIE_TOL,
            StopTieRule::StopOnTie => zmax <= w + TIE_TOL,
        }
    }
}

/// Search parameters shared by all boxes plus one strategy per box.
#[derive(Debug, Clone)]
pub struct SearchEnvironment {
    beta: f64,
    cost: f64,
    profile: Vec<DiscreteDistribution>,
    reservation: Vec<f64>,
    tie_rule: StopTieRule,
}

impl SearchEnvironment {
    pub fn new(beta: f64, cost: f64, profile: Vec<DiscreteDistribution>) -> Result<Self> {
        if profile.is_empty() {
            return Err(Error::param("n", 0.0, "at least one box is required"));
        }
        let reservation = profile
            .iter()
            .map(|d| reservation_price(d, beta, cost).map(|r| r.value))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            beta,
            cost,
            profile,
            reservation,
            tie_rule: StopTieRule::default(),
        })
    }

    /// `beta = 1`, `c = 0`.
    pub fn frictionless(profile: Vec<DiscreteDistribution>) -> Result<Self> {
        Self::new(1.0, 0.0, profile)
    }

    pub fn with_tie_rule(mut self, rule: StopTieRule) -> Self {
        self.tie_rule = rule;
        self
    }

    /// Copy with box `i` replaced; other reservation prices are reused.
    pub fn replace_box(&self, i: usize, d: DiscreteDistribution) -> Result<Self> {
        if i >= self.n() {
            return Err(Error::param("box", i as f64, "index out of range"));
        }
        let z = reservation_price(&d, self.beta, self.cost)?.value;
        let mut out = self.clone();
        out.profile[i] = d;
        out.reservation[i] = z;
        Ok(out)
    }

    pub fn n(&self) -> usize {
        self.profile.len()
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn cost(&self) -> f64 {
        self.cost
    }

    pub fn profile(&self) -> &[DiscreteDistribution] {
        &self.profile
    }

    pub fn reservation_prices(&self) -> &[f64] {
        &self.reservation
    }

    pub fn tie_rule(&self) -> StopTieRule {
        self.tie_rule
    }

    /// Unopened boxes whose reservation price ties the maximum.
    fn top_unopened(&self, opened: &[bool]) -> Option<(f64, Vec<usize>)> {
        let zmax = (0..self.n())
            .filter(|&i| !opened[i])
            .map(|i| self.reservation[i])
            .fold(f64::NEG_INFINITY, f64::max);
        if zmax == f64::NEG_INFINITY {
            return None;
        }
        let ties = (0..self.n())
            .filter(|&i| !opened[i] && self.reservation[i] >= zmax - TIE_TOL)
            .collect();
        Some((zmax, ties))
    }
}

/// Box win probabilities and Pandora's expected utility.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchOutcome {
    pub win_prob: Vec<f64>,
    /// Expected discounted reward of the selected box net of discounted
    /// inspection costs.
    pub pandora_utility: f64,
    pub stop_without_selection_prob: f64,
}

/// Standard errors of a Monte Carlo [`SearchOutcome`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutcomeStdErr {
    pub win_prob: Vec<f64>,
    pub pandora_utility: f64,
    pub stop_without_selection_prob: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloOutcome {
    #[serde(flatten)]
    pub outcome: SearchOutcome,
    pub stderr: OutcomeStdErr,
    pub samples: usize,
}

/// Result of one simulated search path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchPath {
    pub selected: Option<usize>,
    pub utility: f64,
    pub inspections: usize,
}

/// Simulates one search path given each box's realized reward.
///
/// The selection of a reward `x` after `k` inspections is worth
/// `beta^k * x - c * (1 + beta + ... + beta^(k-1))`.
pub fn run_search<R: Rng + ?Sized>(
    env: &SearchEnvironment,
    realizations: &[f64],
    rng: &mut R,
) -> SearchPath {
    assert_eq!(realizations.len(), env.n(), "one realization per box");
    let mut opened = vec![false; env.n()];
    let mut best: Vec<usize> = Vec::new();
    let mut w = 0.0_f64;
    let mut discount = 1.0_f64;
    let mut paid = 0.0_f64;
    let mut inspections = 0;
    while let Some((zmax, ties)) = env.top_unopened(&opened) {
        if env.tie_rule.should_stop(zmax, w) {
            break;
        }
        let i = ties[rng.gen_range(0..ties.len())];
        opened[i] = true;
        paid += env.cost * discount;
        discount *= env.beta;
        inspections += 1;
        let x = realizations[i];
        if best.is_empty() || x > w + TIE_TOL {
            w = x.max(w);
            best.clear();
            best.push(i);
        } else if x >= w - TIE_TOL {
            best.push(i);
        }
    }
    let selected = match best.len() {
        0 => None,
        1 => Some(best[0]),
        k => Some(best[rng.gen_range(0..k)]),
    };
    let utility = match selected {
        Some(_) => discount * w - paid,
        None => -paid,
    };
    SearchPath {
        selected,
        utility,
        inspections,
    }
}

struct Enumerator<'a> {
    env: &'a SearchEnvironment,
    limit: u64,
    branches: u64,
    win: Vec<f64>,
    utility: f64,
    unselected: f64,
}

impl Enumerator<'_> {
    fn visit(
        &mut self,
        opened: &mut Vec<bool>,
        best: &mut Vec<usize>,
        w: f64,
        discount: f64,
        paid: f64,
        prob: f64,
    ) -> Result<()> {
        let env = self.env;
        let next = env
            .top_unopened(opened)
            .filter(|(zmax, _)| !env.tie_rule.should_stop(*zmax, w));
        let Some((_, ties)) = next else {
            self.branches += 1;
            if self.branches > self.limit {
                return Err(Error::EnumerationTooLarge { limit: self.limit });
            }
            if best.is_empty() {
                self.unselected += prob;
                self.utility -= prob * paid;
            } else {
                let share = prob / best.len() as f64;
                for &i in best.iter() {
                    self.win[i] += share;
                }
                self.utility += prob * (discount * w - paid);
            }
            return Ok(());
        };
        let pick = prob / ties.len() as f64;
        let paid = paid + env.cost * discount;
        let discount = discount * env.beta;
        for &i in &ties {
            opened[i] = true;
            for (x, p) in env.profile[i].atoms() {
                let saved = best.clone();
                let w_next = if best.is_empty() || x > w + TIE_TOL {
                    best.clear();
                    best.push(i);
                    x.max(w)
                } else {
                    if x >= w - TIE_TOL {
                        best.push(i);
                    }
                    w
                };
                self.visit(opened, best, w_next, discount, paid, pick * p)?;
                *best = saved;
            }
            opened[i] = false;
        }
        Ok(())
    }
}

/// Exact outcome by enumerating every fair tie-break and every reward the
/// search actually reveals.
pub fn exact_outcome(env: &SearchEnvironment) -> Result<SearchOutcome> {
    exact_outcome_with_limit(env, DEFAULT_BRANCH_LIMIT)
}

pub fn exact_outcome_with_limit(env: &SearchEnvironment, limit: u64) -> Result<SearchOutcome> {
    let mut e = Enumerator {
        env,
        limit,
        branches: 0,
        win: vec![0.0; env.n()],
        utility: 0.0,
        unselected: 0.0,
    };
    e.visit(
        &mut vec![false; env.n()],
        &mut Vec::with_capacity(env.n()),
        0.0,
        1.0,
        0.0,
        1.0,
    )?;
    Ok(SearchOutcome {
        win_prob: e.win,
        pandora_utility: e.utility,
        stop_without_selection_prob: e.unselected,
    })
}

#[derive(Clone)]
struct Moments {
    count: usize,
    wins: Vec<f64>,
    unselected: f64,
    utility_sum: f64,
    utility_sq: f64,
}

impl Moments {
    fn new(n: usize) -> Self {
        Self {
            count: 0,
            wins: vec![0.0; n],
            unselected: 0.0,
            utility_sum: 0.0,
            utility_sq: 0.0,
        }
    }

    fn merge(mut self, other: &Moments) -> Self {
        self.count += other.count;
        for (a, b) in self.wins.iter_mut().zip(&other.wins) {
            *a += b;
        }
        self.unselected += other.unselected;
        self.utility_sum += other.utility_sum;
        self.utility_sq += other.utility_sq;
        self
    }
}

fn run_shard(env: &SearchEnvironment, seed: u64, shard: u64, paths: usize) -> Moments {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(shard);
    let mut m = Moments::new(env.n());
    let mut realized = vec![0.0; env.n()];
    for _ in 0..paths {
        for (slot, d) in realized.iter_mut().zip(env.profile()) {
            *slot = d.sample(&mut rng);
        }
        let path = run_search(env, &realized, &mut rng);
        match path.selected {
            Some(i) => m.wins[i] += 1.0,
            None => m.unselected += 1.0,
        }
        m.utility_sum += path.utility;
        m.utility_sq += path.utility * path.utility;
        m.count += 1;
    }
    m
}

/// Sample mean and its standard error for a `{0, 1}` indicator.
fn bernoulli_stats(hits: f64, n: usize) -> (f64, f64) {
    let nf = n as f64;
    let p = hits / nf;
    if n < 2 {
        return (p, 0.0);
    }
    let var = (hits - nf * p * p) / (nf - 1.0);
    (p, (var.max(0.0) / nf).sqrt())
}

/// Monte Carlo estimate of [`exact_outcome`].
///
/// The result is a pure function of `(env, samples, seed)`: paths are split
/// into fixed-size shards, shard `k` uses ChaCha stream `k` of `seed`, and
/// shards are merged in index order regardless of how many threads ran
/// them.
pub fn monte_carlo_outcome(
    env: &SearchEnvironment,
    samples: usize,
    seed: u64,
) -> Result<MonteCarloOutcome> {
    if samples == 0 {
        return Err(Error::param(
            "samples",
            0.0,
            "at least one path is required",
        ));
    }
    let shards = samples.div_ceil(SHARD_PATHS);
    let parts: Vec<Moments> = parallel::install(|| {
        (0..shards)
            .into_par_iter()
            .map(|k| {
                let paths = SHARD_PATHS.min(samples - k * SHARD_PATHS);
                run_shard(env, seed, k as u64, paths)
            })
            .collect()
    });
    let total = parts
        .iter()
        .fold(Moments::new(env.n()), |acc, m| acc.merge(m));
    let n = total.count;
    let nf = n as f64;
    let (win_prob, win_se): (Vec<f64>, Vec<f64>) =
        total.wins.iter().map(|&h| bernoulli_stats(h, n)).unzip();
    let (unselected, unselected_se) = bernoulli_stats(total.unselected, n);
    let mean_u = total.utility_sum / nf;
    let se_u = if n < 2 {
        0.0
    } else {
        let var = (total.utility_sq - nf * mean_u * mean_u) / (nf - 1.0);
        (var.max(0.0) / nf).sqrt()
    };
    Ok(MonteCarloOutcome {
        outcome: SearchOutcome {
            win_prob,
            pandora_utility: mean_u,
            stop_without_selection_prob: unselected,
        },
        stderr: OutcomeStdErr {
            win_prob: win_se,
            pandora_utility: se_u,
            stop_without_selection_prob: unselected_se,
        },
        samples: n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::{two_point, BinaryPrior};

    fn dist(s: &[f64], w: &[f64]) -> DiscreteDistribution {
        DiscreteDistribution::new(s.to_vec(), w.to_vec()).unwrap()
    }

    fn full_info(mu: f64) -> DiscreteDistribution {
        BinaryPrior::new(mu).unwrap().distribution()
    }

    /// Independent root: scan the kinks of the piecewise-linear `g` and
    /// solve the linear piece that changes sign.
    fn piecewise_root(d: &DiscreteDistribution, beta: f64, cost: f64) -> f64 {
        let g = |z: f64| -cost + beta * d.expect(|x| x.max(z)) - z;
        let mut knots = vec![0.0];
        knots.extend(d.support().iter().copied());
        knots.push(1.0);
        for w in knots.windows(2) {
            let (a, b) = (w[0], w[1]);
            if g(a) > 0.0 && g(b) <= 0.0 {
                return a + g(a) * (b - a) / (g(a) - g(b));
            }
        }
        panic!("no sign change");
    }

    #[test]
    fn binary_prior_reservation_price() {
        let d = full_info(0.5);
        let z = reservation_price(&d, 1.0, 0.1).unwrap();
        // (0.5 - 0.1) / (1 - 0.5)
        assert!((z.value - 0.8).abs() < 1e-12);
        assert!(z.attained);
        assert!((piecewise_root(&d, 1.0, 0.1) - 0.8).abs() < 1e-12);
        assert!((reservation_price_binary(0.5, 1.0, 0.1).unwrap() - 0.8).abs() < 1e-15);
        let zb = reservation_price_binary(0.5, 0.95, 0.05).unwrap();
        assert!((zb - 0.425 / 0.525).abs() < 1e-15);
        assert!((zb - 0.809524).abs() < 1e-6);
    }

    #[test]
    fn binary_closed_form_limit() {
        let z = reservation_price_binary(0.3, 1.0 - 1e-12, 1e-12).unwrap();
        assert!((z - 1.0).abs() < 1e-9);
    }

    #[test]
    fn ternary_prior_and_its_fusion_share_the_maximal_price() {
        let prior = dist(&[0.0, 0.5, 1.0], &[0.3, 0.3, 0.4]);
        let fused = dist(&[0.0, 0.25, 0.5, 1.0], &[0.15, 0.3, 0.15, 0.4]);
        let zp = reservation_price(&prior, 1.0, 0.1).unwrap().value;
        let zf = reservation_price(&fused, 1.0, 0.1).unwrap().value;
        assert!((zp - 0.75).abs() < 1e-12);
        assert!((zf - 0.75).abs() < 1e-12);
    }

    #[test]
    fn frictionless_price_is_top_of_support() {
        let d = dist(&[0.1, 0.35, 0.6], &[0.2, 0.5, 0.3]);
        let z = reservation_price(&d, 1.0, 0.0).unwrap();
        assert_eq!(z.value, 0.6);
        assert!(!z.attained);
        let z = reservation_price(&DiscreteDistribution::point_mass(0.4).unwrap(), 1.0, 0.0);
        assert_eq!(z.unwrap().value, 0.4);
    }

    #[test]
    fn solver_matches_piecewise_root() {
        let d = dist(&[0.0, 0.2, 0.45, 0.8, 1.0], &[0.1, 0.3, 0.2, 0.3, 0.1]);
        for &(beta, cost) in &[(0.9, 0.0), (1.0, 0.05), (0.7, 0.1), (0.95, 0.2)] {
            let z = reservation_price(&d, beta, cost).unwrap().value;
            assert!((z - piecewise_root(&d, beta, cost)).abs() < 1e-12);
        }
    }

    #[test]
    fn reservation_price_preconditions() {
        let d = full_info(0.2);
        assert!(matches!(
            reservation_price(&d, 1.0, 0.2),
            Err(Error::Precondition(_))
        ));
        assert!(reservation_price(&d, 0.0, 0.0).is_err());
        assert!(reservation_price(&d, 1.2, 0.0).is_err());
        assert!(reservation_price(&d, 1.0, -0.1).is_err());
        assert!(reservation_price_binary(0.2, 1.0, 0.3).is_err());
    }

    #[test]
    fn single_box_is_selected() {
        let env = SearchEnvironment::new(0.9, 0.05, vec![full_info(0.5)]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for x in [0.0, 1.0] {
            let path = run_search(&env, &[x], &mut rng);
            assert_eq!(path.selected, Some(0));
            assert!((path.utility - (0.9 * x - 0.05)).abs() < 1e-15);
            assert_eq!(path.inspections, 1);
        }
    }

    #[test]
    fn high_reward_stops_search() {
        let env = SearchEnvironment::new(1.0, 0.01, vec![full_info(0.6), full_info(0.6)]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let path = run_search(&env, &[1.0, 1.0], &mut rng);
            assert_eq!(path.inspections, 1);
            assert!((path.utility - 0.99).abs() < 1e-15);
        }
        // whichever box is opened first and shows 1 wins outright
        let mut wins = [0usize; 2];
        for _ in 0..2000 {
            let path = run_search(&env, &[1.0, 0.0], &mut rng);
            wins[path.selected.unwrap()] += 1;
        }
        assert_eq!(wins[0], 2000);
    }

    #[test]
    fn point_masses_split_fairly() {
        let pm = DiscreteDistribution::point_mass(0.5).unwrap();
        let env = SearchEnvironment::frictionless(vec![pm.clone(), pm]).unwrap();
        let exact = exact_outcome(&env).unwrap();
        assert_eq!(exact.win_prob, vec![0.5, 0.5]);
        let mc = monte_carlo_outcome(&env, 40_000, 9).unwrap();
        for (p, se) in mc.outcome.win_prob.iter().zip(&mc.stderr.win_prob) {
            assert!((p - 0.5).abs() <= 4.0 * se);
        }
    }

    #[test]
    fn uninformative_deviator_against_full_disclosure() {
        let env = SearchEnvironment::new(
            1.0,
            0.01,
            vec![
                full_info(0.4),
                DiscreteDistribution::point_mass(0.4).unwrap(),
            ],
        )
        .unwrap();
        let out = exact_outcome(&env).unwrap();
        assert!((out.win_prob[1] - 0.6).abs() < 1e-12);
        assert!((out.win_prob[0] - 0.4).abs() < 1e-12);
        assert_eq!(out.stop_without_selection_prob, 0.0);
    }

    #[test]
    fn full_disclosure_welfare_two_boxes() {
        let env = SearchEnvironment::new(0.95, 0.05, vec![full_info(0.5), full_info(0.5)]).unwrap();
        let out = exact_outcome(&env).unwrap();
        // (0.475 - 0.05) * (1 + 0.475)
        assert!((out.pandora_utility - 0.626875).abs() < 1e-12);
        assert!((out.win_prob[0] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn tie_rule_changes_payoffs_only_at_coincidences() {
        // box 0 can show exactly the top of box 1's support
        let hi = dist(&[0.0, 0.5, 1.0], &[0.25, 0.5, 0.25]);
        let pm = DiscreteDistribution::point_mass(0.5).unwrap();
        let env = SearchEnvironment::frictionless(vec![hi, pm]).unwrap();
        let cont = exact_outcome(&env).unwrap();
        let stop = exact_outcome(&env.clone().with_tie_rule(StopTieRule::StopOnTie)).unwrap();
        // static game: box 0 wins 0.25 + 0.5 / 2
        assert!((cont.win_prob[0] - 0.5).abs() < 1e-15);
        assert!((stop.win_prob[0] - 0.75).abs() < 1e-15);
        assert!((cont.pandora_utility - stop.pandora_utility).abs() < 1e-15);
    }

    #[test]
    fn enumeration_guard() {
        let d = dist(&[0.0, 0.5, 1.0], &[0.25, 0.5, 0.25]);
        let env = SearchEnvironment::frictionless(vec![d; 5]).unwrap();
        assert!(matches!(
            exact_outcome_with_limit(&env, 100),
            Err(Error::EnumerationTooLarge { limit: 100 })
        ));
    }

    #[test]
    fn monte_carlo_is_deterministic() {
        let env = SearchEnvironment::new(
            0.9,
            0.02,
            vec![full_info(0.4), two_point(0.4, 0.1, 0.9).unwrap()],
        )
        .unwrap();
        let a = monte_carlo_outcome(&env, 70_001, 42).unwrap();
        let b = monte_carlo_outcome(&env, 70_001, 42).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.samples, 70_001);
        let c = monte_carlo_outcome(&env, 70_001, 43).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn monte_carlo_single_path() {
        let env = SearchEnvironment::new(0.9, 0.02, vec![full_info(0.4), full_info(0.4)]).unwrap();
        let mc = monte_carlo_outcome(&env, 1, 7).unwrap();
        let total: f64 = mc.outcome.win_prob.iter().sum();
        assert_eq!(total, 1.0);
        assert!(mc.stderr.win_prob.iter().all(|&s| s == 0.0));
        assert!(monte_carlo_outcome(&env, 0, 7).is_err());
    }
}
