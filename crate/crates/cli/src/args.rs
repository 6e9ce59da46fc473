use std::path::PathBuf;

use buyhold_core::buyhold::{self, CircuitBreaker, ReturnBounds, PRESETS};
use chrono::NaiveDate;
use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};

use crate::error::CliError;

/// Largest horizon accepted by `--days`, `--from` and `--to`.
pub const MAX_DAYS: u32 = 10_000;

#[derive(Debug, Parser)]
#[command(name = "buyhold", version, about = "Optimal static buy-and-hold plans under bounded daily returns")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// BAL weights, the worst-case downturn mixture and the competitive ratio
    Weights(WeightsArgs),
    /// Solve a zero-sum matrix game read from CSV (row-major, no header)
    Solve(SolveArgs),
    /// BAL and DA competitive ratios over a range of horizons
    Sweep(SweepArgs),
    /// The n downturn exchange-rate sequences, one per row
    Downturns(DownturnsArgs),
    /// Monthly BAL vs DA backtest on a `date,close` price file
    Backtest(BacktestArgs),
    /// Seeded synthetic price series whose daily moves respect the bounds
    Synth(SynthArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Svg,
    Text,
}

#[derive(Debug, Clone, Args)]
#[command(group(ArgGroup::new("market").required(true).args(["alpha", "preset"])))]
pub struct MarketArgs {
    /// Largest daily rise factor of the exchange rate (> 1)
    #[arg(long, requires = "beta", value_name = "FACTOR")]
    pub alpha: Option<f64>,
    /// Largest daily fall factor of the exchange rate (> 1)
    #[arg(long, requires = "alpha", value_name = "FACTOR")]
    pub beta: Option<f64>,
    /// Circuit-breaker preset: amsterdam, bangkok, paris, taipei, tel-aviv, tokyo, vienna
    #[arg(long, value_name = "NAME", value_parser = parse_preset, conflicts_with_all = ["alpha", "beta"])]
    pub preset: Option<CircuitBreaker>,
}

impl MarketArgs {
    pub fn bounds(&self) -> Result<ReturnBounds, CliError> {
        match (self.alpha, self.beta, self.preset) {
            (Some(a), Some(b), None) => ReturnBounds::new(a, b).map_err(|e| CliError::Usage(e.to_string())),
            (None, None, Some(p)) => Ok(p.bounds()),
            _ => Err(CliError::Usage("give either --alpha and --beta, or --preset".into())),
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Output format (each command has its own default)
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Write to this file instead of standard output
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct WeightsArgs {
    #[command(flatten)]
    pub market: MarketArgs,
    /// Number of trading days n
    #[arg(long, value_parser = clap::value_parser!(u32).range(2..=MAX_DAYS as i64))]
    pub days: u32,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    /// Matrix CSV file, `-` for standard input
    #[arg(value_name = "MATRIX")]
    pub input: PathBuf,
    /// Components of the closed-form solution above -TOL are rounded to zero
    #[arg(long, value_name = "TOL", value_parser = parse_tolerance)]
    pub tolerance: Option<f64>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub market: MarketArgs,
    /// First horizon
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u32).range(2..=MAX_DAYS as i64))]
    pub from: u32,
    /// Last horizon (inclusive)
    #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u32).range(2..=MAX_DAYS as i64))]
    pub to: u32,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct DownturnsArgs {
    #[command(flatten)]
    pub market: MarketArgs,
    /// Number of trading days n
    #[arg(long, value_parser = clap::value_parser!(u32).range(2..=MAX_DAYS as i64))]
    pub days: u32,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct BacktestArgs {
    #[command(flatten)]
    pub market: MarketArgs,
    /// Price file with header `date,close`, `-` for standard input
    #[arg(value_name = "PRICES")]
    pub input: PathBuf,
    /// Relative slack on the daily bounds before a move is flagged
    #[arg(long, value_name = "SLACK", value_parser = parse_tolerance)]
    pub tolerance: Option<f64>,
    /// Extra fixed strategy, `NAME=w1,w2,...` (weights are normalized; runs on months of matching length)
    #[arg(long = "fixed", value_name = "NAME=WEIGHTS")]
    pub fixed: Vec<String>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[command(flatten)]
    pub market: MarketArgs,
    /// RNG seed
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Number of calendar months to generate
    #[arg(long, default_value_t = 12, value_parser = clap::value_parser!(u32).range(1..=1200))]
    pub months: u32,
    /// First trading date (YYYY-MM-DD)
    #[arg(long, default_value = "1997-01-01")]
    pub start: NaiveDate,
    /// Closing price on the first day
    #[arg(long, default_value_t = 100.0, value_parser = parse_price)]
    pub start_price: f64,
    /// Write to this file instead of standard output
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

fn parse_preset(s: &str) -> Result<CircuitBreaker, String> {
    buyhold::preset(s).ok_or_else(|| {
        let names: Vec<&str> = PRESETS.iter().map(|p| p.name).collect();
        format!("unknown preset `{s}`; expected one of {}", names.join(", "))
    })
}

fn parse_tolerance(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v.is_finite() && v >= 0.0 => Ok(v),
        _ => Err(format!("`{s}` is not a finite non-negative number")),
    }
}

fn parse_price(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v.is_finite() && v > 0.0 => Ok(v),
        _ => Err(format!("`{s}` is not a positive number")),
    }
}
