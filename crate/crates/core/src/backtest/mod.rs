//! Monthly investment-plan backtests.
//!
//! Each calendar month of a price series is one plan: one unit of capital is
//! spread over the month's trading days by a static strategy whose weights
//! are regenerated for that month's length. Exchange rates are `1 / price`
//! with no normalisation of the first rate, which leaves realized ratios
//! unchanged since they are scale invariant.

mod prices;
mod report;
mod synth;

use chrono::NaiveDate;
use rayon::prelude::*;
use thiserror::Error;

use crate::buyhold::{self, MarketError, ReturnBounds, StaticStrategy};

pub use prices::{load_prices, segment_monthly, PlanWindow, PricePoint, PriceSeries, Segmentation, SkippedMonth};
pub use report::SummaryRow;
pub use synth::{synthetic_series, SyntheticConfig};

/// Default relative slack on the daily bounds when flagging violations.
pub const VIOLATION_SLACK: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum BacktestError {
    #[error("parse error at row {row}, column {column}: {reason}")]
    Parse { row: usize, column: usize, reason: String },
    #[error("non-positive price {value} on {date}")]
    NonPositivePrice { date: NaiveDate, value: f64 },
    #[error("duplicate date {0}")]
    DuplicateDate(NaiveDate),
    #[error("price series is empty")]
    EmptySeries,
    #[error("window {label} has {days} trading day(s); at least 2 are needed")]
    WindowTooShort { label: String, days: usize },
    #[error("no strategies to run")]
    NoStrategies,
    #[error(transparent)]
    Market(#[from] MarketError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// How a plan's daily weights are produced for a window of `n` days.
#[derive(Debug, Clone, PartialEq)]
pub enum Plan {
    Balanced,
    DollarAveraging,
    /// Fixed weights; only windows of exactly matching length can run it.
    Fixed(StaticStrategy),
}

impl Plan {
    pub fn weights(&self, bounds: ReturnBounds, n: usize) -> Result<StaticStrategy, MarketError> {
        match self {
            Plan::Balanced => Ok(buyhold::bal_weights(&bounds.with_days(n)?)),
            Plan::DollarAveraging => buyhold::da_weights(n),
            Plan::Fixed(s) if s.len() == n => Ok(s.clone()),
            Plan::Fixed(s) => Err(MarketError::LengthMismatch { expected: n, got: s.len() }),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NamedStrategy {
    pub name: String,
    pub plan: Plan,
}

impl NamedStrategy {
    pub fn new(name: impl Into<String>, plan: Plan) -> Self {
        Self { name: name.into(), plan }
    }

    /// The two strategies compared throughout: BAL and DA.
    pub fn standard() -> Vec<NamedStrategy> {
        vec![Self::new("BAL", Plan::Balanced), Self::new("DA", Plan::DollarAveraging)]
    }
}

/// A day whose rate moved outside `[1/beta, alpha]` relative to the
/// previous trading day of the same window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Violation {
    /// Zero-based day index within the window (always ≥ 1).
    pub day: usize,
    pub factor: f64,
    pub min: f64,
    pub max: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlanResult {
    pub shares: f64,
    pub currency_value: f64,
    pub realized_ratio: f64,
    pub violations: Vec<Violation>,
}

/// Day-over-day rate factors outside the bounds (with relative `slack`).
pub fn bound_violations(window: &PlanWindow, bounds: ReturnBounds, slack: f64) -> Vec<Violation> {
    let rates = window.rates();
    rates
        .windows(2)
        .enumerate()
        .filter(|(_, w)| !buyhold::step_within(w[0], w[1], bounds, slack))
        .map(|(i, w)| Violation { day: i + 1, factor: w[1] / w[0], min: 1.0 / bounds.beta, max: bounds.alpha })
        .collect()
}

/// Executes one plan on one window.
pub fn run_plan(plan: &Plan, window: &PlanWindow, bounds: ReturnBounds, slack: f64) -> Result<PlanResult, BacktestError> {
    let weights = plan.weights(bounds, window.len())?;
    run_weights(&weights, window, bounds, slack)
}

/// Executes fixed weights on one window.
pub fn run_weights(
    weights: &StaticStrategy,
    window: &PlanWindow,
    bounds: ReturnBounds,
    slack: f64,
) -> Result<PlanResult, BacktestError> {
    if weights.len() != window.len() {
        return Err(MarketError::LengthMismatch { expected: window.len(), got: weights.len() }.into());
    }
    let rates = window.rates();
    let shares: f64 = weights.weights().iter().zip(&rates).map(|(a, e)| a * e).sum();
    let best = rates.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(PlanResult {
        shares,
        currency_value: shares * window.last_price(),
        realized_ratio: best / shares,
        violations: bound_violations(window, bounds, slack),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct StrategyOutcome {
    pub name: String,
    /// `Err` carries the reason the strategy was skipped on this window.
    pub result: Result<PlanResult, String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WindowReport {
    pub label: String,
    pub n: usize,
    pub outcomes: Vec<StrategyOutcome>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BacktestReport {
    pub bounds: ReturnBounds,
    pub slack: f64,
    pub windows: Vec<WindowReport>,
    pub skipped: Vec<SkippedMonth>,
    pub reordered_input: bool,
}

/// Runs every strategy on every monthly window of `series`.
///
/// Windows are evaluated in parallel; the report keeps date order. A
/// strategy that cannot run on a window is recorded as skipped for that
/// window instead of failing the report.
pub fn compare_report(
    series: &PriceSeries,
    bounds: ReturnBounds,
    strategies: &[NamedStrategy],
    slack: f64,
) -> Result<BacktestReport, BacktestError> {
    if strategies.is_empty() {
        return Err(BacktestError::NoStrategies);
    }
    let Segmentation { windows, skipped } = segment_monthly(series);
    let windows = windows
        .par_iter()
        .map(|w| WindowReport {
            label: w.label.clone(),
            n: w.len(),
            outcomes: strategies
                .iter()
                .map(|s| StrategyOutcome {
                    name: s.name.clone(),
                    result: run_plan(&s.plan, w, bounds, slack).map_err(|e| e.to_string()),
                })
                .collect(),
        })
        .collect();
    Ok(BacktestReport { bounds, slack, windows, skipped, reordered_input: series.was_reordered() })
}
