use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use extremal::paths::SamplerChoice;
use extremal::pricing::PayoffKind;

#[derive(Debug, Parser)]
#[command(
    name = "extremal",
    version,
    about = "Conditioned Brownian / GBM paths, extreme-maximum limit checks and short-maturity barrier pricing",
    color = clap::ColorChoice::Never,
    allow_negative_numbers = true
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Closed-form barrier-crossing probability, with the printed-remark audit.
    Prob(Flags),
    /// Hitting-time concentration table P(τ >= (1-√T)T | τ <= T).
    Hitting(Flags),
    /// Asymptotic up-and-in price with an optional Monte Carlo check.
    Price(Flags),
    /// Convergence of conditioned paths to the limit curve (or of the pricing error).
    Converge(Flags),
    /// Brownian extreme-value bound check over a list of ε.
    BmExtreme(Flags),
    /// Draw one conditioned path and dump it.
    Simulate(Flags),
}

impl Command {
    pub fn flags(&self) -> &Flags {
        match self {
            Command::Prob(f)
            | Command::Hitting(f)
            | Command::Price(f)
            | Command::Converge(f)
            | Command::BmExtreme(f)
            | Command::Simulate(f) => f,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Output {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PayoffArg {
    European,
    Asian,
    Lookback,
}

impl From<PayoffArg> for PayoffKind {
    fn from(p: PayoffArg) -> Self {
        match p {
            PayoffArg::European => PayoffKind::European,
            PayoffArg::Asian => PayoffKind::Asian,
            PayoffArg::Lookback => PayoffKind::Lookback,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SamplerArg {
    Auto,
    Rejection,
    Tilt,
}

impl From<SamplerArg> for SamplerChoice {
    fn from(s: SamplerArg) -> Self {
        match s {
            SamplerArg::Auto => SamplerChoice::Auto,
            SamplerArg::Rejection => SamplerChoice::Rejection,
            SamplerArg::Tilt => SamplerChoice::Tilt,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct Flags {
    /// Initial price S
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true, value_parser = positive)]
    pub spot: f64,
    /// Barrier level B (must exceed the spot)
    #[arg(long, default_value_t = 1.1, allow_negative_numbers = true, value_parser = positive)]
    pub barrier: f64,
    /// Volatility σ
    #[arg(long, default_value_t = 0.3, allow_negative_numbers = true, value_parser = positive)]
    pub sigma: f64,
    /// Drift μ
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true, value_parser = finite)]
    pub mu: f64,
    /// Maturity T
    #[arg(long, default_value_t = 0.25, allow_negative_numbers = true, value_parser = positive)]
    pub maturity: f64,
    /// Strike K
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true, value_parser = non_negative)]
    pub strike: f64,
    /// Payoff kind
    #[arg(long, value_enum, default_value_t = PayoffArg::European)]
    pub payoff: PayoffArg,
    /// Monte Carlo size [default: price 100000, converge 20000, bm-extreme 100000, hitting 20000; 0 disables MC for price/hitting]
    #[arg(long)]
    pub paths: Option<u64>,
    /// Time steps per path [default: 16 for bm-extreme, 512 otherwise]
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub steps: Option<u64>,
    /// Master seed
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Conditional sampler; auto picks rejection iff P(B,T) >= 1e-3
    #[arg(long, value_enum, default_value_t = SamplerArg::Auto)]
    pub sampler: SamplerArg,
    /// Comma-separated maturities [default: converge 0.4,0.2,0.1,0.05,0.025; hitting 0.1,0.05,0.01,0.005]
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true, value_parser = positive)]
    pub t_list: Option<Vec<f64>>,
    /// Comma-separated ε values for bm-extreme [default: 1,0.5,0.3333333333333333,0.25]
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true, value_parser = positive)]
    pub epsilon_list: Option<Vec<f64>>,
    /// Output format [default: csv for converge, bm-extreme and simulate; json otherwise]
    #[arg(long, value_enum)]
    pub output: Option<Output>,
    /// Write output to this file instead of standard output
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads [default: available parallelism]
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub threads: Option<u64>,
    /// converge: fit the normalised pricing error |mc/P - Ψ| instead of the sup distance
    #[arg(long)]
    pub pricing_error: bool,
}

fn finite(s: &str) -> Result<f64, String> {
    let x: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if x.is_finite() {
        Ok(x)
    } else {
        Err("must be finite".into())
    }
}

fn positive(s: &str) -> Result<f64, String> {
    let x = finite(s)?;
    if x > 0.0 {
        Ok(x)
    } else {
        Err("must be > 0".into())
    }
}

fn non_negative(s: &str) -> Result<f64, String> {
    let x = finite(s)?;
    if x >= 0.0 {
        Ok(x)
    } else {
        Err("must be >= 0".into())
    }
}
