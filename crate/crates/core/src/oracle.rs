//! Brute-force best responses and equilibrium certificates on grids.
//!
//! Frictionless payoffs are linear in the deviator's distribution: a
//! realization `x` wins with probability `W(x)` against the opponents, with
//! shared maxima split evenly. Maximizing `sum g(x) W(x)` over mean-`mu`
//! distributions on a grid is a linear program with two equality
//! constraints, so some optimum sits on at most two grid points and an
//! exhaustive pair search is exact on the grid.
//!
//! With frictions, payoffs come from [`exact_outcome`] and the search is
//! over a stated candidate family, so the result is a lower bound on the
//! true best response.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distributions::{two_point, BinaryPrior, DiscreteDistribution, StrategyGrid, MERGE_TOL};
use crate::error::{Error, Result};
use crate::parallel;
use crate::search_engine::{
    exact_outcome, reservation_price, reservation_price_binary, SearchEnvironment, TIE_TOL,
};

/// Reservation values swept by the frictions candidate family.
pub const Z_GRID_POINTS: usize = 64;

/// Halvings tried when shrinking a deviation towards its limit.
const MAX_HALVINGS: usize = 40;

/// A later candidate replaces the current best only if it beats it by more
/// than this, so rounding noise never displaces an earlier candidate.
const IMPROVEMENT_TOL: f64 = 1e-14;

/// Means of strategies handed to the oracle must agree to this tolerance.
const MEAN_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum Regime {
    Frictionless,
    Frictions { beta: f64, cost: f64 },
}

impl Regime {
    pub fn beta_cost(self) -> (f64, f64) {
        match self {
            Regime::Frictionless => (1.0, 0.0),
            Regime::Frictions { beta, cost } => (beta, cost),
        }
    }
}

/// Which deviations a best-response search covered.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    /// Every distribution on the grid with the target mean (exact via
    /// pairs of grid points).
    TwoPoint,
    /// Incumbent, full disclosure, no disclosure, and for each of
    /// [`Z_GRID_POINTS`] reservation values `z` up to the full-disclosure
    /// value: one atom on a grid point above `z`, with the mass below `z`
    /// either concentrated at its mean or split between 0 and a grid point
    /// below `z`.
    AtomSweep,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BestResponseReport {
    pub baseline_payoff: f64,
    pub best_deviation: DiscreteDistribution,
    pub best_payoff: f64,
    pub gain: f64,
    pub family: Family,
    pub candidates: usize,
    /// Some candidates exceeded the enumeration budget and were skipped.
    pub partial: bool,
}

/// A finite mixture of pure strategies sharing one mean.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiniteMixedStrategy {
    components: Vec<(DiscreteDistribution, f64)>,
}

impl FiniteMixedStrategy {
    pub fn new(components: Vec<(DiscreteDistribution, f64)>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidDistribution("empty mixture".into()));
        }
        if components.iter().any(|(_, p)| !p.is_finite() || *p <= 0.0) {
            return Err(Error::InvalidDistribution(
                "mixture probabilities must be positive".into(),
            ));
        }
        let total: f64 = components.iter().map(|(_, p)| p).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidDistribution(format!(
                "mixture probabilities sum to {total}"
            )));
        }
        let mu = components[0].0.mean();
        if components
            .iter()
            .any(|(d, _)| (d.mean() - mu).abs() > MEAN_TOL)
        {
            return Err(Error::InvalidDistribution(
                "mixture components must share one mean".into(),
            ));
        }
        Ok(Self { components })
    }

    pub fn pure(d: DiscreteDistribution) -> Self {
        Self {
            components: vec![(d, 1.0)],
        }
    }

    pub fn components(&self) -> &[(DiscreteDistribution, f64)] {
        &self.components
    }

    pub fn mean(&self) -> f64 {
        self.components[0].0.mean()
    }
}

/// A concrete profitable-deviation construction and its exact effect.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviationExhibit {
    pub deviation: FiniteMixedStrategy,
    pub baseline_payoff: f64,
    pub deviation_payoff: f64,
    pub gain: f64,
    /// Size of the final perturbation: how far the atom moved up, or how
    /// far the reservation value was raised.
    pub step: f64,
}

fn check_mean(d: &DiscreteDistribution, mu: f64, what: &str) -> Result<()> {
    if (d.mean() - mu).abs() > MEAN_TOL {
        return Err(Error::Precondition(format!(
            "{what} has mean {} but the grid targets {mu}",
            d.mean()
        )));
    }
    Ok(())
}

/// Probability that realization `x` is selected in the frictionless game.
pub fn win_value(x: f64, opponents: &[DiscreteDistribution]) -> f64 {
    // ties[t]: all opponents processed so far are <= x and exactly t equal x
    let mut ties = vec![1.0];
    for d in opponents {
        let (mut below, mut equal) = (0.0, 0.0);
        for (y, w) in d.atoms() {
            if y < x - MERGE_TOL {
                below += w;
            } else if y <= x + MERGE_TOL {
                equal += w;
            }
        }
        let mut next = vec![0.0; ties.len() + 1];
        for (t, &p) in ties.iter().enumerate() {
            next[t] += p * below;
            next[t + 1] += p * equal;
        }
        ties = next;
    }
    ties.iter()
        .enumerate()
        .map(|(t, p)| p / (t as f64 + 1.0))
        .sum()
}

/// Frictionless payoff of `d` against `opponents`.
pub fn frictionless_payoff(d: &DiscreteDistribution, opponents: &[DiscreteDistribution]) -> f64 {
    d.atoms().map(|(x, w)| w * win_value(x, opponents)).sum()
}

/// Exact best response on `grid` without frictions.
pub fn frictionless_best_response(
    incumbent: &DiscreteDistribution,
    opponents: &[DiscreteDistribution],
    grid: &StrategyGrid,
) -> Result<BestResponseReport> {
    let mu = grid.mu();
    check_mean(incumbent, mu, "incumbent")?;
    for d in opponents {
        check_mean(d, mu, "opponent")?;
    }
    let pts = grid.points();
    let values: Vec<f64> = pts.iter().map(|&x| win_value(x, opponents)).collect();
    let k_mu = grid.mu_index();

    let mut best = values[k_mu];
    let mut best_pair = (k_mu, k_mu);
    for i in 0..k_mu {
        for j in k_mu + 1..pts.len() {
            let span = pts[j] - pts[i];
            let v = values[i] * (pts[j] - mu) / span + values[j] * (mu - pts[i]) / span;
            if v > best {
                best = v;
                best_pair = (i, j);
            }
        }
    }
    let candidates = 1 + k_mu * (pts.len() - k_mu - 1);
    let baseline = frictionless_payoff(incumbent, opponents);
    let (best_deviation, best_payoff) = if baseline >= best {
        (incumbent.clone(), baseline)
    } else if best_pair.0 == best_pair.1 {
        (DiscreteDistribution::point_mass(mu)?, best)
    } else {
        (two_point(mu, pts[best_pair.0], pts[best_pair.1])?, best)
    };
    Ok(BestResponseReport {
        baseline_payoff: baseline,
        best_deviation,
        best_payoff,
        gain: best_payoff - baseline,
        family: Family::TwoPoint,
        candidates,
        partial: false,
    })
}

/// Candidate deviations of the frictions family, in a fixed order.
pub fn frictions_candidates(
    incumbent: &DiscreteDistribution,
    grid: &StrategyGrid,
    beta: f64,
    cost: f64,
) -> Result<Vec<DiscreteDistribution>> {
    let mu = grid.mu();
    let z_full = reservation_price_binary(mu, beta, cost)?;
    let mut out = vec![
        incumbent.clone(),
        BinaryPrior::new(mu)?.distribution(),
        DiscreteDistribution::point_mass(mu)?,
    ];
    let pts = grid.points();
    for k in 1..=Z_GRID_POINTS {
        let z = z_full * k as f64 / Z_GRID_POINTS as f64;
        for &m in pts.iter().filter(|&&m| m > z + TIE_TOL) {
            // z (1 - beta (1 - p)) = beta p m - c
            let p = (z * (1.0 - beta) + cost) / (beta * (m - z));
            if !(p > 0.0 && p < 1.0) {
                continue;
            }
            let mut nu = (mu - p * m) / (1.0 - p);
            if nu.abs() <= MERGE_TOL {
                nu = 0.0;
            }
            if nu < 0.0 || nu >= z - TIE_TOL {
                continue;
            }
            out.push(DiscreteDistribution::new(vec![nu, m], vec![1.0 - p, p])?);
            for &l in pts
                .iter()
                .filter(|&&l| l > nu + MERGE_TOL && l < z - TIE_TOL)
            {
                let on_l = (1.0 - p) * nu / l;
                out.push(DiscreteDistribution::new(
                    vec![0.0, l, m],
                    vec![1.0 - p - on_l, on_l, p],
                )?);
            }
        }
    }
    Ok(out)
}

/// Best response over the frictions candidate family.
pub fn frictions_best_response(
    incumbent: &DiscreteDistribution,
    opponents: &[DiscreteDistribution],
    grid: &StrategyGrid,
    beta: f64,
    cost: f64,
) -> Result<BestResponseReport> {
    let mu = grid.mu();
    check_mean(incumbent, mu, "incumbent")?;
    for d in opponents {
        check_mean(d, mu, "opponent")?;
    }
    let mut profile = Vec::with_capacity(opponents.len() + 1);
    profile.push(incumbent.clone());
    profile.extend_from_slice(opponents);
    let base_env = SearchEnvironment::new(beta, cost, profile)?;
    let candidates = frictions_candidates(incumbent, grid, beta, cost)?;

    let payoffs: Vec<Result<Option<f64>>> = parallel::install(|| {
        candidates
            .par_iter()
            .map(|d| {
                let env = base_env.replace_box(0, d.clone())?;
                match exact_outcome(&env) {
                    Ok(out) => Ok(Some(out.win_prob[0])),
                    Err(Error::EnumerationTooLarge { .. }) => Ok(None),
                    Err(e) => Err(e),
                }
            })
            .collect()
    });
    let mut partial = false;
    let mut best: Option<(usize, f64)> = None;
    for (k, r) in payoffs.into_iter().enumerate() {
        match r? {
            None => partial = true,
            Some(v) => {
                if best.is_none_or(|(_, b)| v > b + IMPROVEMENT_TOL) {
                    best = Some((k, v));
                }
            }
        }
    }
    let baseline = match (best, partial) {
        (Some((0, v)), _) => v,
        _ => exact_outcome(&base_env)?.win_prob[0],
    };
    let (k, best_payoff) = best.ok_or(Error::EnumerationTooLarge {
        limit: crate::search_engine::DEFAULT_BRANCH_LIMIT,
    })?;
    Ok(BestResponseReport {
        baseline_payoff: baseline,
        best_deviation: candidates[k].clone(),
        best_payoff,
        gain: best_payoff - baseline,
        family: Family::AtomSweep,
        candidates: candidates.len(),
        partial,
    })
}

/// Moves the atom at `atom` slightly up, dumping the mass needed to keep
/// the mean onto 0.
///
/// The shift starts at the next grid point above the atom (or halfway to
/// the next atom of `strategy`, whichever is closer) and is halved until
/// the exact frictionless payoff gain is positive or the shift vanishes.
pub fn check_atom_instability(
    strategy: &DiscreteDistribution,
    atom: f64,
    n: usize,
    grid: &StrategyGrid,
) -> Result<DeviationExhibit> {
    if n < 2 {
        return Err(Error::param(
            "n",
            n as f64,
            "at least two boxes are required",
        ));
    }
    check_mean(strategy, grid.mu(), "strategy")?;
    let p = strategy.weight_at(atom);
    if p <= 0.0 {
        return Err(Error::Precondition(format!(
            "strategy has no atom at {atom}"
        )));
    }
    if atom >= 1.0 - MERGE_TOL {
        return Err(Error::Precondition(
            "an atom on 1 cannot be shifted upwards".into(),
        ));
    }
    let opponents = vec![strategy.clone(); n - 1];
    let baseline = frictionless_payoff(strategy, &opponents);
    let next_atom = strategy
        .support()
        .iter()
        .copied()
        .find(|&x| x > atom + MERGE_TOL);
    let mut target = grid.next_above(atom + MERGE_TOL).unwrap_or(1.0);
    if let Some(x) = next_atom {
        if x <= target {
            target = 0.5 * (atom + x);
        }
    }
    let mut last = None;
    for _ in 0..MAX_HALVINGS {
        let dev = shift_atom(strategy, atom, p, target)?;
        let payoff = frictionless_payoff(&dev, &opponents);
        let exhibit = DeviationExhibit {
            deviation: FiniteMixedStrategy::pure(dev),
            baseline_payoff: baseline,
            deviation_payoff: payoff,
            gain: payoff - baseline,
            step: target - atom,
        };
        if exhibit.gain > 0.0 {
            return Ok(exhibit);
        }
        last = Some(exhibit);
        target = 0.5 * (atom + target);
    }
    Ok(last.expect("at least one attempt"))
}

fn shift_atom(
    strategy: &DiscreteDistribution,
    atom: f64,
    p: f64,
    target: f64,
) -> Result<DiscreteDistribution> {
    let mut atoms: Vec<(f64, f64)> = strategy
        .atoms()
        .filter(|&(x, _)| (x - atom).abs() > MERGE_TOL)
        .collect();
    if atom > MERGE_TOL {
        let kept = p * atom / target;
        atoms.push((target, kept));
        atoms.push((0.0, p - kept));
    } else {
        // An atom on 0 moves up; the top atom pays for the mean.
        let (top, w_top) = *atoms
            .last()
            .ok_or_else(|| Error::Precondition("point mass on 0 has mean 0".into()))?;
        let moved = p.min(0.5 * w_top * top / target);
        let paid = moved * target / top;
        let last = atoms.len() - 1;
        atoms[last].1 -= paid;
        atoms.push((target, moved));
        atoms.push((0.0, p - moved + paid));
    }
    let (support, weights) = atoms.into_iter().unzip();
    DiscreteDistribution::new(support, weights)
}

/// Win probability of box 0 playing `own` while the other `n - 1` boxes
/// play `others`, averaged over every draw of mixture components.
pub fn mixed_payoff(
    own: &FiniteMixedStrategy,
    others: &FiniteMixedStrategy,
    n: usize,
    beta: f64,
    cost: f64,
) -> Result<f64> {
    let k = others.components().len();
    let profiles = k.pow(n as u32 - 1);
    let mut total = 0.0;
    for (d, q) in own.components() {
        for code in 0..profiles {
            let mut c = code;
            let mut prob = *q;
            let mut profile = Vec::with_capacity(n);
            profile.push(d.clone());
            for _ in 1..n {
                let (o, qo) = &others.components()[c % k];
                c /= k;
                prob *= qo;
                profile.push(o.clone());
            }
            let env = SearchEnvironment::new(beta, cost, profile)?;
            total += prob * exact_outcome(&env)?.win_prob[0];
        }
    }
    Ok(total)
}

/// Raises the reservation value of `d` to `target` (or as close as the
/// chosen spread allows) with a mean-preserving spread.
///
/// Mass `kappa` leaves the smallest positive atom at or below the current
/// reservation value and is split between the top atom and 0. If every atom
/// below the reservation value sits on 0, the top atom is spread onto
/// `{0, 1}` instead.
fn raise_reservation(
    d: &DiscreteDistribution,
    z: f64,
    target: f64,
    beta: f64,
    cost: f64,
) -> Result<DiscreteDistribution> {
    let top = d.max();
    let source = d
        .atoms()
        .find(|&(x, _)| x > MERGE_TOL && x <= z + TIE_TOL)
        .map(|(x, w)| (x, w, top))
        .or_else(|| (top < 1.0 - MERGE_TOL).then(|| (top, d.weight_at(top), 1.0)));
    let Some((from, available, to)) = source else {
        return Err(Error::Precondition(
            "strategy is already full disclosure".into(),
        ));
    };
    let spread = |kappa: f64| -> Result<DiscreteDistribution> {
        let mut atoms: Vec<(f64, f64)> = d.atoms().collect();
        for a in atoms.iter_mut() {
            if (a.0 - from).abs() <= MERGE_TOL {
                a.1 -= kappa;
            }
        }
        atoms.push((to, kappa * from / to));
        atoms.push((0.0, kappa * (1.0 - from / to)));
        let (s, w): (Vec<f64>, Vec<f64>) = atoms.into_iter().unzip();
        DiscreteDistribution::new(s, w)
    };
    let z_at =
        |kappa: f64| -> Result<f64> { Ok(reservation_price(&spread(kappa)?, beta, cost)?.value) };
    if z_at(available)? <= target {
        return spread(available);
    }
    let (mut lo, mut hi) = (0.0, available);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if z_at(mid)? < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    spread(hi)
}

/// The overcut: against a symmetric finite mixture that puts positive
/// probability on a reservation value `z` below the full-disclosure value,
/// play the same mixture but replace every component inducing `z` by a
/// spread version inducing a slightly higher value.
///
/// The targeted `z` is the one with the largest induced probability. The
/// raise starts at `z_full / 64` (capped below the next induced value) and
/// is halved until the exact payoff gain is positive.
pub fn check_overcut_deviation(
    mix: &FiniteMixedStrategy,
    n: usize,
    beta: f64,
    cost: f64,
) -> Result<DeviationExhibit> {
    if n < 2 {
        return Err(Error::param(
            "n",
            n as f64,
            "at least two boxes are required",
        ));
    }
    if beta == 1.0 && cost == 0.0 {
        return Err(Error::Precondition(
            "the overcut needs search frictions".into(),
        ));
    }
    let mu = mix.mean();
    let z_full = reservation_price_binary(mu, beta, cost)?;
    let zs = mix
        .components()
        .iter()
        .map(|(d, _)| reservation_price(d, beta, cost).map(|r| r.value))
        .collect::<Result<Vec<f64>>>()?;

    // (z, induced probability) for each distinct value below z_full
    let mut induced: Vec<(f64, f64)> = Vec::new();
    for (&z, (_, q)) in zs.iter().zip(mix.components()) {
        if z >= z_full - TIE_TOL {
            continue;
        }
        match induced.iter_mut().find(|(v, _)| (v - z).abs() <= TIE_TOL) {
            Some(slot) => slot.1 += q,
            None => induced.push((z, *q)),
        }
    }
    let Some(&(z_hat, _)) = induced
        .iter()
        .max_by(|a, b| a.1.total_cmp(&b.1).then(a.0.total_cmp(&b.0)))
    else {
        return Err(Error::Precondition(
            "no induced reservation-value atom below the full-disclosure value".into(),
        ));
    };
    let ceiling = zs
        .iter()
        .copied()
        .chain(std::iter::once(z_full))
        .filter(|&z| z > z_hat + TIE_TOL)
        .fold(f64::INFINITY, f64::min);
    let mut step = (z_full / Z_GRID_POINTS as f64).min(0.5 * (ceiling - z_hat));

    let baseline = mixed_payoff(mix, mix, n, beta, cost)?;
    let mut last = None;
    for _ in 0..MAX_HALVINGS {
        if step <= 1e3 * TIE_TOL {
            break;
        }
        let components = mix
            .components()
            .iter()
            .zip(&zs)
            .map(|((d, q), &z)| {
                if (z - z_hat).abs() <= TIE_TOL {
                    raise_reservation(d, z, z_hat + step, beta, cost).map(|r| (r, *q))
                } else {
                    Ok((d.clone(), *q))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        let deviation = FiniteMixedStrategy::new(components)?;
        let payoff = mixed_payoff(&deviation, mix, n, beta, cost)?;
        let exhibit = DeviationExhibit {
            deviation,
            baseline_payoff: baseline,
            deviation_payoff: payoff,
            gain: payoff - baseline,
            step,
        };
        if exhibit.gain > 0.0 {
            return Ok(exhibit);
        }
        last = Some(exhibit);
        step *= 0.5;
    }
    last.ok_or_else(|| Error::Precondition("reservation values too close to overcut".into()))
}

/// Result of checking every box of a profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub certified: bool,
    pub epsilon: f64,
    /// Largest gain over boxes.
    pub gain: f64,
    /// Best deviation of the box with the largest gain.
    pub best_deviation: DiscreteDistribution,
    pub family: Family,
    pub regime: Regime,
    pub per_box: Vec<BestResponseReport>,
}

/// `5 * grid step` without frictions, `1e-9` with.
pub fn default_epsilon(regime: Regime, grid: &StrategyGrid) -> f64 {
    match regime {
        Regime::Frictionless => 5.0 * grid.step(),
        Regime::Frictions { .. } => 1e-9,
    }
}

/// Checks that no box gains more than `epsilon` by deviating within the
/// regime's candidate family.
pub fn certify_epsilon_equilibrium(
    profile: &[DiscreteDistribution],
    regime: Regime,
    grid: &StrategyGrid,
    epsilon: f64,
) -> Result<Certificate> {
    if profile.len() < 2 {
        return Err(Error::param(
            "n",
            profile.len() as f64,
            "at least two boxes are required",
        ));
    }
    let per_box = (0..profile.len())
        .map(|i| {
            let opponents: Vec<DiscreteDistribution> = profile
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, d)| d.clone())
                .collect();
            match regime {
                Regime::Frictionless => frictionless_best_response(&profile[i], &opponents, grid),
                Regime::Frictions { beta, cost } => {
                    frictions_best_response(&profile[i], &opponents, grid, beta, cost)
                }
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let worst = per_box
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.gain.total_cmp(&b.1.gain).then(b.0.cmp(&a.0)))
        .map(|(i, _)| i)
        .expect("at least two boxes");
    Ok(Certificate {
        certified: per_box.iter().all(|r| r.gain <= epsilon),
        epsilon,
        gain: per_box[worst].gain,
        best_deviation: per_box[worst].best_deviation.clone(),
        family: per_box[worst].family,
        regime,
        per_box,
    })
}
