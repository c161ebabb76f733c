//! Pandora's-box search over boxes that design their own disclosure.
//!
//! * [`distributions`]: finite priors and signal distributions, garblings,
//!   strategy grids.
//! * [`search_engine`]: reservation prices and exact or simulated search
//!   outcomes.
//! * [`equilibrium`]: closed-form symmetric equilibria.
//! * [`oracle`]: best-response search and equilibrium certificates.
//! * [`welfare`]: searcher payoffs and the comparison between regimes.
//! * [`cli`]: the `pandora-eq` command line.

pub mod cli;
pub mod distributions;
pub mod equilibrium;
pub mod error;
pub mod oracle;
pub mod parallel;
pub mod search_engine;
pub mod welfare;

pub use distributions::{BinaryPrior, DiscreteDistribution, StrategyGrid};
pub use equilibrium::FrictionlessEquilibrium;
pub use error::{Error, Result};
pub use oracle::{BestResponseReport, Certificate, FiniteMixedStrategy, Regime};
pub use search_engine::{SearchEnvironment, SearchOutcome};
pub use welfare::WelfareComparison;
