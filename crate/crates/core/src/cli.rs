//! The `pandora-eq` command line.
//!
//! Every subcommand is deterministic given its arguments. Output goes to
//! stdout or, with `--out`, to a file written through a temporary sibling
//! and renamed into place.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::distributions::{BinaryPrior, DiscreteDistribution, StrategyGrid};
use crate::equilibrium::{
    discretize_equilibrium, frictionless_equilibrium, frictions_threshold, FrictionlessEquilibrium,
};
use crate::error::Error;
use crate::oracle::{certify_epsilon_equilibrium, default_epsilon, Certificate, Regime};
use crate::search_engine::{
    exact_outcome, monte_carlo_outcome, reservation_price, SearchEnvironment, SearchOutcome,
};
use crate::welfare::{
    compare_welfare, critical_discount, figure1_data, figure2_data, friction_dominance_region,
    DominanceRow, WelfareComparison,
};

pub const DEFAULT_SEED: u64 = 12_345;
pub const DEFAULT_GRID: usize = 201;
/// Inspection cost used with `--frictions` when `--cost` is not given.
pub const DEFAULT_FRICTION_COST: f64 = 0.01;

#[derive(Debug, Parser)]
#[command(
    name = "pandora-eq",
    version,
    about = "Equilibria of sequential search with strategic information disclosure"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Output format; defaults to csv for `welfare` and `figures`, json otherwise.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve the symmetric equilibrium.
    Equilibrium(EquilibriumArgs),
    /// Run Pandora's rule on a profile (exact, or Monte Carlo with --samples).
    Simulate(SimulateArgs),
    /// Certify a profile as an approximate equilibrium by best-response search.
    Verify(VerifyArgs),
    /// Compare searcher welfare with and without frictions.
    Welfare(WelfareArgs),
    /// Tables behind the comparative-statics and welfare figures.
    Figures(FiguresArgs),
}

#[derive(Debug, Clone, Args)]
pub struct MarketArgs {
    /// Number of boxes.
    #[arg(long)]
    pub n: Option<usize>,
    /// Prior mean (probability that a box holds the prize).
    #[arg(long)]
    pub mu: Option<f64>,
    /// Search with frictions (discounting and/or inspection costs).
    #[arg(long)]
    pub frictions: bool,
    /// Discount factor (default 1).
    #[arg(long)]
    pub beta: Option<f64>,
    /// Inspection cost (default 0, or 0.01 with --frictions).
    #[arg(long)]
    pub cost: Option<f64>,
    /// Points of the uniform strategy grid used to discretize and verify.
    #[arg(long, default_value_t = DEFAULT_GRID)]
    pub grid: usize,
}

impl MarketArgs {
    fn n(&self) -> anyhow::Result<usize> {
        self.n.context("--n is required")
    }

    fn mu(&self) -> anyhow::Result<f64> {
        self.mu.context("--mu is required")
    }

    fn beta_cost(&self) -> (f64, f64) {
        let default_cost = if self.frictions {
            DEFAULT_FRICTION_COST
        } else {
            0.0
        };
        (self.beta.unwrap_or(1.0), self.cost.unwrap_or(default_cost))
    }

    fn regime(&self) -> Regime {
        if self.frictions {
            let (beta, cost) = self.beta_cost();
            Regime::Frictions { beta, cost }
        } else {
            Regime::Frictionless
        }
    }

    /// The equilibrium strategy of the regime: discretized `F*` without
    /// frictions, full disclosure with.
    fn equilibrium_strategy(&self) -> anyhow::Result<DiscreteDistribution> {
        let (n, mu) = (self.n()?, self.mu()?);
        if self.frictions {
            let threshold = frictions_threshold(n)?;
            if mu < threshold {
                return Err(Error::NoPureEquilibrium { n, mu, threshold }.into());
            }
            Ok(BinaryPrior::new(mu)?.distribution())
        } else {
            let eq = frictionless_equilibrium(n, mu)?;
            Ok(discretize_equilibrium(
                &eq,
                &StrategyGrid::uniform(self.grid, mu)?,
            )?)
        }
    }

    /// Profile from `--profile`, else `n` copies of the equilibrium strategy.
    fn profile(&self, file: Option<&Path>) -> anyhow::Result<Vec<DiscreteDistribution>> {
        match file {
            Some(path) => {
                let profile = read_profile(path)?;
                if let Some(n) = self.n {
                    if n != profile.len() {
                        bail!(
                            "--n {n} disagrees with the {} boxes in {}",
                            profile.len(),
                            path.display()
                        );
                    }
                }
                Ok(profile)
            }
            None => Ok(vec![self.equilibrium_strategy()?; self.n()?]),
        }
    }
}

#[derive(Debug, Args)]
pub struct EquilibriumArgs {
    #[command(flatten)]
    pub market: MarketArgs,
    /// Also write the symmetric equilibrium profile (JSON array) here.
    #[arg(long)]
    pub profile_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub market: MarketArgs,
    /// JSON array of `{"support": [...], "weights": [...]}` objects.
    #[arg(long)]
    pub profile: Option<PathBuf>,
    /// Monte Carlo paths; exact enumeration when absent.
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub market: MarketArgs,
    #[arg(long)]
    pub profile: Option<PathBuf>,
    /// Tolerated gain (default 5 grid steps without frictions, 1e-9 with).
    #[arg(long)]
    pub epsilon: Option<f64>,
}

#[derive(Debug, Args)]
pub struct WelfareArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub mu: f64,
    #[arg(long, default_value_t = 1.0)]
    pub beta: f64,
    #[arg(long, default_value_t = 0.0)]
    pub cost: f64,
    /// Smallest discount factor in the dominance table.
    #[arg(long, default_value_t = 0.8)]
    pub beta_min: f64,
    /// Intervals between `--beta-min` and 1 in the dominance table.
    #[arg(long, default_value_t = 20)]
    pub beta_steps: usize,
}

#[derive(Debug, Args)]
pub struct FiguresArgs {
    /// 1: equilibrium atom and support bound against n; 2: welfare against n.
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
    pub id: u8,
    /// Prior mean (default 1/2 for figure 1, 1/3 for figure 2).
    #[arg(long)]
    pub mu: Option<f64>,
    #[arg(long, default_value_t = 2)]
    pub n_min: usize,
    #[arg(long, default_value_t = 30)]
    pub n_max: usize,
    /// Figure 2: keep rows where full disclosure is not an equilibrium.
    #[arg(long)]
    pub all_n: bool,
}

#[derive(Debug, Serialize)]
#[serde(tag = "regime", rename_all = "kebab-case")]
enum EquilibriumReport {
    Frictionless(FrictionlessEquilibrium),
    Frictions {
        n: usize,
        mu: f64,
        beta: f64,
        cost: f64,
        threshold: f64,
        strategy: &'static str,
        reservation_price: f64,
    },
}

#[derive(Debug, Serialize)]
struct SimulateReport {
    n: usize,
    beta: f64,
    cost: f64,
    method: &'static str,
    reservation_prices: Vec<f64>,
    #[serde(flatten)]
    outcome: SearchOutcome,
    #[serde(skip_serializing_if = "Option::is_none")]
    stderr: Option<crate::search_engine::OutcomeStdErr>,
    #[serde(skip_serializing_if = "Option::is_none")]
    samples: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
}

#[derive(Debug, Serialize)]
struct WelfareReport {
    comparison: WelfareComparison,
    critical_discount: f64,
    region: Vec<DominanceRow>,
}

pub fn read_profile(path: &Path) -> anyhow::Result<Vec<DiscreteDistribution>> {
    let text =
        fs::read_to_string(path).with_context(|| format!("reading profile {}", path.display()))?;
    let profile: Vec<DiscreteDistribution> = serde_json::from_str(&text)
        .with_context(|| format!("parsing profile {}", path.display()))?;
    if profile.is_empty() {
        bail!("profile {} has no boxes", path.display());
    }
    Ok(profile)
}

/// Writes `bytes` to `path` via a temporary file in the same directory.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> anyhow::Result<()> {
    let file_name = path
        .file_name()
        .with_context(|| format!("{} is not a file path", path.display()))?;
    let mut tmp_name = std::ffi::OsString::from(".");
    tmp_name.push(file_name);
    tmp_name.push(format!(".{}.tmp", std::process::id()));
    let tmp = path.with_file_name(tmp_name);
    fs::write(&tmp, bytes).with_context(|| format!("writing {}", tmp.display()))?;
    fs::rename(&tmp, path).with_context(|| format!("renaming onto {}", path.display()))?;
    Ok(())
}

fn json<T: Serialize>(value: &T) -> anyhow::Result<Vec<u8>> {
    let mut out = serde_json::to_vec_pretty(value)?;
    out.push(b'\n');
    Ok(out)
}

fn csv_rows<T: Serialize>(rows: impl IntoIterator<Item = T>) -> anyhow::Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row)?;
    }
    Ok(w.into_inner()?)
}

fn run_equilibrium(args: &EquilibriumArgs, format: Format) -> anyhow::Result<Vec<u8>> {
    let m = &args.market;
    let (n, mu) = (m.n()?, m.mu()?);
    let report = if m.frictions {
        let (beta, cost) = m.beta_cost();
        let strategy = m.equilibrium_strategy()?;
        EquilibriumReport::Frictions {
            n,
            mu,
            beta,
            cost,
            threshold: frictions_threshold(n)?,
            strategy: "full-information",
            reservation_price: reservation_price(&strategy, beta, cost)?.value,
        }
    } else {
        EquilibriumReport::Frictionless(frictionless_equilibrium(n, mu)?)
    };
    if let Some(path) = &args.profile_out {
        write_atomic(path, &json(&vec![m.equilibrium_strategy()?; n])?)?;
    }
    match (format, &report) {
        (Format::Json, _) => json(&report),
        (Format::Csv, EquilibriumReport::Frictionless(eq)) => csv_rows([eq]),
        (
            Format::Csv,
            EquilibriumReport::Frictions {
                threshold,
                reservation_price,
                beta,
                cost,
                ..
            },
        ) => {
            #[derive(Serialize)]
            struct Row<'a> {
                n: usize,
                mu: f64,
                beta: f64,
                cost: f64,
                threshold: f64,
                strategy: &'a str,
                reservation_price: f64,
            }
            csv_rows([Row {
                n,
                mu,
                beta: *beta,
                cost: *cost,
                threshold: *threshold,
                strategy: "full-information",
                reservation_price: *reservation_price,
            }])
        }
    }
}

fn run_simulate(args: &SimulateArgs, format: Format) -> anyhow::Result<Vec<u8>> {
    let profile = args.market.profile(args.profile.as_deref())?;
    let (beta, cost) = args.market.beta_cost();
    let env = SearchEnvironment::new(beta, cost, profile)?;
    let report = match args.samples {
        None => SimulateReport {
            n: env.n(),
            beta,
            cost,
            method: "exact",
            reservation_prices: env.reservation_prices().to_vec(),
            outcome: exact_outcome(&env)?,
            stderr: None,
            samples: None,
            seed: None,
        },
        Some(samples) => {
            let mc = monte_carlo_outcome(&env, samples, args.seed)?;
            SimulateReport {
                n: env.n(),
                beta,
                cost,
                method: "monte-carlo",
                reservation_prices: env.reservation_prices().to_vec(),
                outcome: mc.outcome,
                stderr: Some(mc.stderr),
                samples: Some(mc.samples),
                seed: Some(args.seed),
            }
        }
    };
    match format {
        Format::Json => json(&report),
        Format::Csv => {
            #[derive(Serialize)]
            struct Row {
                r#box: usize,
                reservation_price: f64,
                win_prob: f64,
                pandora_utility: f64,
            }
            csv_rows((0..report.n).map(|i| Row {
                r#box: i,
                reservation_price: report.reservation_prices[i],
                win_prob: report.outcome.win_prob[i],
                pandora_utility: report.outcome.pandora_utility,
            }))
        }
    }
}

fn run_verify(args: &VerifyArgs, format: Format) -> anyhow::Result<Vec<u8>> {
    let m = &args.market;
    let profile = m.profile(args.profile.as_deref())?;
    let mu = profile[0].mean();
    if let Some(given) = m.mu {
        if (given - mu).abs() > 1e-9 {
            bail!("--mu {given} disagrees with the profile mean {mu}");
        }
    }
    let grid = StrategyGrid::uniform(m.grid, mu)?;
    let regime = m.regime();
    let epsilon = args
        .epsilon
        .unwrap_or_else(|| default_epsilon(regime, &grid));
    let cert: Certificate = certify_epsilon_equilibrium(&profile, regime, &grid, epsilon)?;
    match format {
        Format::Json => json(&cert),
        Format::Csv => {
            #[derive(Serialize)]
            struct Row {
                r#box: usize,
                baseline_payoff: f64,
                best_payoff: f64,
                gain: f64,
                candidates: usize,
                partial: bool,
                epsilon: f64,
                certified: bool,
            }
            csv_rows(cert.per_box.iter().enumerate().map(|(i, r)| Row {
                r#box: i,
                baseline_payoff: r.baseline_payoff,
                best_payoff: r.best_payoff,
                gain: r.gain,
                candidates: r.candidates,
                partial: r.partial,
                epsilon: cert.epsilon,
                certified: r.gain <= cert.epsilon,
            }))
        }
    }
}

fn run_welfare(args: &WelfareArgs, format: Format) -> anyhow::Result<Vec<u8>> {
    if !(args.beta_min > 0.0 && args.beta_min <= 1.0) || args.beta_steps == 0 {
        bail!("--beta-min must lie in (0, 1] and --beta-steps must be positive");
    }
    let betas: Vec<f64> = (0..=args.beta_steps)
        .map(|k| args.beta_min + (1.0 - args.beta_min) * k as f64 / args.beta_steps as f64)
        .collect();
    let report = WelfareReport {
        comparison: compare_welfare(args.n, args.mu, args.beta, args.cost)?,
        critical_discount: critical_discount(args.n, args.mu)?,
        region: friction_dominance_region(args.n, args.mu, &betas)?,
    };
    match format {
        Format::Json => json(&report),
        Format::Csv => csv_rows(&report.region),
    }
}

fn run_figures(args: &FiguresArgs, format: Format) -> anyhow::Result<Vec<u8>> {
    if args.n_min < 2 || args.n_max < args.n_min {
        bail!("need 2 <= --n-min <= --n-max");
    }
    let range = args.n_min..=args.n_max;
    match args.id {
        1 => {
            let rows = figure1_data(args.mu.unwrap_or(0.5), range)?;
            match format {
                Format::Json => json(&rows),
                Format::Csv => csv_rows(&rows),
            }
        }
        _ => {
            let rows = figure2_data(args.mu.unwrap_or(1.0 / 3.0), range, args.all_n)?;
            match format {
                Format::Json => json(&rows),
                Format::Csv => csv_rows(&rows),
            }
        }
    }
}

/// Runs a parsed command line and returns the bytes it produced.
pub fn execute(cli: &Cli) -> anyhow::Result<Vec<u8>> {
    let tabular = matches!(cli.command, Command::Welfare(_) | Command::Figures(_));
    let format = cli
        .format
        .unwrap_or(if tabular { Format::Csv } else { Format::Json });
    match &cli.command {
        Command::Equilibrium(a) => run_equilibrium(a, format),
        Command::Simulate(a) => run_simulate(a, format),
        Command::Verify(a) => run_verify(a, format),
        Command::Welfare(a) => run_welfare(a, format),
        Command::Figures(a) => run_figures(a, format),
    }
}

/// Runs the command and writes its output; returns the process exit code.
pub fn run(cli: &Cli) -> i32 {
    let result = execute(cli).and_then(|bytes| match &cli.out {
        Some(path) => write_atomic(path, &bytes),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(&bytes)?;
            stdout.flush()?;
            Ok(())
        }
    });
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e:#}");
            exit_code(&e)
        }
    }
}

/// 2 for violated model conditions, 1 for everything else.
pub fn exit_code(e: &anyhow::Error) -> i32 {
    match e.downcast_ref::<Error>() {
        Some(err) if err.is_precondition() => 2,
        _ => 1,
    }
}
