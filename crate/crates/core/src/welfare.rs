//! Searcher welfare with and without frictions.
//!
//! Without frictions the searcher collects the maximum of `n` draws from the
//! equilibrium distribution. With frictions and full disclosure she opens
//! boxes until the first prize, so her payoff is a discounted geometric sum.

use serde::{Deserialize, Serialize};

use crate::equilibrium::{
    comparative_statics, frictionless_equilibrium, frictions_threshold, StaticsRow,
};
use crate::error::{Error, Result};

const BISECTION_ITERS: usize = 200;

/// Utilities closer than this count as equal.
pub const WELFARE_TIE_TOL: f64 = 1e-12;

fn check_n(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::param(
            "n",
            n as f64,
            "at least two boxes are required",
        ));
    }
    Ok(())
}

fn check_mu(mu: f64) -> Result<()> {
    if !(mu > 0.0 && mu < 1.0) {
        return Err(Error::param("mu", mu, "prior mean must lie in (0, 1)"));
    }
    Ok(())
}

/// Expected maximum of `n` independent draws from the frictionless
/// equilibrium: `1 - (1-a)^n + n s (s / (mu n))^(n/(n-1)) / (2n - 1)`.
pub fn frictionless_pandora_utility(n: usize, mu: f64) -> Result<f64> {
    let eq = frictionless_equilibrium(n, mu)?;
    let nf = n as f64;
    let (a, s) = (eq.a, eq.s);
    Ok(1.0 - (1.0 - a).powi(n as i32)
        + nf * s * (s / (mu * nf)).powf(nf / (nf - 1.0)) / (2.0 * nf - 1.0))
}

/// Searcher payoff when every box fully discloses:
/// `(beta mu - c) (1 - (beta (1 - mu))^n) / (1 - beta (1 - mu))`.
///
/// Only an equilibrium payoff when `mu` reaches the frictions threshold;
/// below it the function refuses.
pub fn frictions_pandora_utility(n: usize, mu: f64, beta: f64, cost: f64) -> Result<f64> {
    check_n(n)?;
    check_mu(mu)?;
    let threshold = frictions_threshold(n)?;
    if mu < threshold {
        return Err(Error::NoPureEquilibrium { n, mu, threshold });
    }
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(Error::param(
            "beta",
            beta,
            "discount factor must lie in (0, 1]",
        ));
    }
    if cost.is_nan() || cost < 0.0 {
        return Err(Error::param(
            "cost",
            cost,
            "inspection cost must be nonnegative",
        ));
    }
    if beta * mu <= cost {
        return Err(Error::Precondition(format!(
            "inspection is unprofitable: beta * mu = {} <= cost = {cost}",
            beta * mu
        )));
    }
    let r = beta * (1.0 - mu);
    Ok((beta * mu - cost) * (1.0 - r.powi(n as i32)) / (1.0 - r))
}

/// `1 - (1 - mu)^n`: the full-disclosure payoff as `beta -> 1`, `c -> 0`.
pub fn frictions_limit_utility(n: usize, mu: f64) -> Result<f64> {
    check_n(n)?;
    check_mu(mu)?;
    Ok(1.0 - (1.0 - mu).powi(n as i32))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Winner {
    Frictionless,
    Frictions,
    Equal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WelfareComparison {
    pub n: usize,
    pub mu: f64,
    pub beta: f64,
    pub cost: f64,
    pub u_frictionless: f64,
    pub u_frictions: f64,
    pub winner: Winner,
}

pub fn compare_welfare(n: usize, mu: f64, beta: f64, cost: f64) -> Result<WelfareComparison> {
    let u_frictionless = frictionless_pandora_utility(n, mu)?;
    let u_frictions = frictions_pandora_utility(n, mu, beta, cost)?;
    let winner = if (u_frictions - u_frictionless).abs() <= WELFARE_TIE_TOL {
        Winner::Equal
    } else if u_frictions > u_frictionless {
        Winner::Frictions
    } else {
        Winner::Frictionless
    };
    Ok(WelfareComparison {
        n,
        mu,
        beta,
        cost,
        u_frictionless,
        u_frictions,
        winner,
    })
}

/// Discount factor at which costless full-disclosure search ties the
/// frictionless market. Frictions win for every larger `beta`.
pub fn critical_discount(n: usize, mu: f64) -> Result<f64> {
    let target = frictionless_pandora_utility(n, mu)?;
    // errors out below the threshold
    frictions_pandora_utility(n, mu, 1.0, 0.0)?;
    let u = |beta: f64| frictions_pandora_utility(n, mu, beta, 0.0);
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    for _ in 0..BISECTION_ITERS {
        let mid = 0.5 * (lo + hi);
        if u(mid)? < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(hi)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DominanceRow {
    pub beta: f64,
    /// Largest cost at which frictions still weakly win; `None` when they
    /// lose even at zero cost.
    pub c_boundary: Option<f64>,
}

/// For each `beta`, the largest `c` with frictional welfare at least the
/// frictionless welfare.
pub fn friction_dominance_region(n: usize, mu: f64, betas: &[f64]) -> Result<Vec<DominanceRow>> {
    let target = frictionless_pandora_utility(n, mu)?;
    betas
        .iter()
        .map(|&beta| {
            let u = |c: f64| frictions_pandora_utility(n, mu, beta, c);
            if u(0.0)? < target {
                return Ok(DominanceRow {
                    beta,
                    c_boundary: None,
                });
            }
            let (mut lo, mut hi) = (0.0_f64, beta * mu);
            for _ in 0..BISECTION_ITERS {
                let mid = 0.5 * (lo + hi);
                if mid >= beta * mu {
                    break;
                }
                if u(mid)? >= target {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            Ok(DominanceRow {
                beta,
                c_boundary: Some(lo),
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Figure2Row {
    pub n: usize,
    pub u_frictionless: f64,
    pub u_frictions_limit: f64,
    /// Whether full disclosure is an equilibrium at this `n`, so that the
    /// limit column is an equilibrium payoff.
    pub applicable: bool,
}

/// Equilibrium `(n, a, s)` rows.
pub fn figure1_data(mu: f64, n_range: impl IntoIterator<Item = usize>) -> Result<Vec<StaticsRow>> {
    comparative_statics(mu, n_range)
}

/// Welfare rows for costless, undiscounted search. Rows where full
/// disclosure is not an equilibrium are dropped unless
/// `include_inapplicable` is set, in which case they are kept and flagged.
pub fn figure2_data(
    mu: f64,
    n_range: impl IntoIterator<Item = usize>,
    include_inapplicable: bool,
) -> Result<Vec<Figure2Row>> {
    let mut rows = Vec::new();
    for n in n_range {
        let applicable = mu >= frictions_threshold(n)?;
        if !applicable && !include_inapplicable {
            continue;
        }
        rows.push(Figure2Row {
            n,
            u_frictionless: frictionless_pandora_utility(n, mu)?,
            u_frictions_limit: frictions_limit_utility(n, mu)?,
            applicable,
        });
    }
    Ok(rows)
}
