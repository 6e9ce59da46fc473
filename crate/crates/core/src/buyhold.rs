//! Static buy-and-hold trading in the bounded daily return model.
//!
//! An investor converts one unit of capital into shares over `n` days. The
//! exchange rate (shares per unit of capital) moves by at most a factor
//! `alpha` up and `1/beta` down per day. A static strategy fixes the amount
//! `a_i` invested on each day in advance; its accumulation on rates `e` is
//! `Σ a_i e_i` while the offline optimum collects `max e_i`.
//!
//! Against static strategies the adversary only needs the `n` downturns
//! (rise by `alpha` for `j` days, then fall by `1/beta`), which turns the
//! problem into the square game `K(i, j) = S_i(e_j) / A(e_j)`. The balanced
//! strategy (BAL) is its unique optimal mixed strategy and has a closed form.

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::game::{GameError, MixedStrategy, PayoffMatrix, SIMPLEX_SUM_TOLERANCE};
use crate::matrix::Matrix;

/// Default relative slack when checking a step against the daily bounds.
pub const ADMISSIBILITY_SLACK: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MarketError {
    #[error("invalid market parameters: {0}")]
    InvalidParams(String),
    #[error("length mismatch: expected {expected} days, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("invalid exchange rate sequence: {0}")]
    InvalidSequence(String),
    #[error("invalid static strategy: {0}")]
    InvalidStrategy(String),
    #[error("strategy accumulates nothing on downturn {0}")]
    DivisionByZero(usize),
    #[error("horizon {n} is out of floating-point range for these bounds")]
    OutOfRange { n: usize },
    #[error(transparent)]
    Game(#[from] GameError),
}

/// Daily return bounds: `e / beta ≤ e' ≤ e * alpha`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReturnBounds {
    pub alpha: f64,
    pub beta: f64,
}

impl ReturnBounds {
    pub fn new(alpha: f64, beta: f64) -> Result<Self, MarketError> {
        if !(alpha.is_finite() && alpha > 1.0) {
            return Err(MarketError::InvalidParams(format!("alpha must be a finite number > 1, got {alpha}")));
        }
        if !(beta.is_finite() && beta > 1.0) {
            return Err(MarketError::InvalidParams(format!("beta must be a finite number > 1, got {beta}")));
        }
        Ok(Self { alpha, beta })
    }

    pub fn with_days(self, n: usize) -> Result<MarketParams, MarketError> {
        MarketParams::from_bounds(self, n)
    }

    /// Same bounds with the roles of rise and fall exchanged.
    pub fn swapped(self) -> Self {
        Self { alpha: self.beta, beta: self.alpha }
    }
}

/// Return bounds together with the investment horizon `n ≥ 2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarketParams {
    bounds: ReturnBounds,
    n: usize,
}

impl MarketParams {
    pub fn new(alpha: f64, beta: f64, n: usize) -> Result<Self, MarketError> {
        Self::from_bounds(ReturnBounds::new(alpha, beta)?, n)
    }

    pub fn from_bounds(bounds: ReturnBounds, n: usize) -> Result<Self, MarketError> {
        if n < 2 {
            return Err(MarketError::InvalidParams(format!("horizon must be at least 2 days, got {n}")));
        }
        Ok(Self { bounds, n })
    }

    pub fn alpha(&self) -> f64 {
        self.bounds.alpha
    }

    pub fn beta(&self) -> f64 {
        self.bounds.beta
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn bounds(&self) -> ReturnBounds {
        self.bounds
    }

    pub fn swapped(&self) -> Self {
        Self { bounds: self.bounds.swapped(), n: self.n }
    }

    fn denominator(&self) -> f64 {
        let (a, b, n) = (self.alpha(), self.beta(), self.n as f64);
        n * a * b - (n - 1.0) * (a + b) + (n - 2.0)
    }
}

/// A circuit-breaker rule: the daily price floor (`1/alpha`) and cap (`beta`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CircuitBreaker {
    pub name: &'static str,
    pub price_floor: f64,
    pub price_cap: f64,
}

impl CircuitBreaker {
    pub fn bounds(&self) -> ReturnBounds {
        ReturnBounds { alpha: 1.0 / self.price_floor, beta: self.price_cap }
    }
}

pub const PRESETS: [CircuitBreaker; 7] = [
    CircuitBreaker { name: "amsterdam", price_floor: 0.90, price_cap: 1.10 },
    CircuitBreaker { name: "bangkok", price_floor: 0.90, price_cap: 1.10 },
    CircuitBreaker { name: "paris", price_floor: 0.95, price_cap: 1.10 },
    CircuitBreaker { name: "taipei", price_floor: 0.93, price_cap: 1.07 },
    CircuitBreaker { name: "tel-aviv", price_floor: 0.95, price_cap: 1.10 },
    CircuitBreaker { name: "tokyo", price_floor: 0.95, price_cap: 1.30 },
    CircuitBreaker { name: "vienna", price_floor: 0.95, price_cap: 1.05 },
];

/// Looks up a preset by (case-insensitive) exchange name.
pub fn preset(name: &str) -> Option<CircuitBreaker> {
    PRESETS.iter().copied().find(|p| p.name.eq_ignore_ascii_case(name))
}

/// Daily exchange rates `e_1..e_n`; the rate before day one is taken as 1.
#[derive(Debug, Clone, PartialEq)]
pub struct ExchangeRateSequence(Vec<f64>);

impl ExchangeRateSequence {
    pub fn new(rates: Vec<f64>) -> Result<Self, MarketError> {
        if rates.is_empty() {
            return Err(MarketError::InvalidSequence("no rates".into()));
        }
        if let Some((i, r)) = rates.iter().enumerate().find(|(_, r)| !(r.is_finite() && **r > 0.0)) {
            return Err(MarketError::InvalidSequence(format!("rate {i} = {r} is not positive and finite")));
        }
        Ok(Self(rates))
    }

    pub fn rates(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Same sequence multiplied by `factor > 0`.
    pub fn scaled(&self, factor: f64) -> Result<Self, MarketError> {
        Self::new(self.0.iter().map(|r| r * factor).collect())
    }
}

impl fmt::Display for ExchangeRateSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<")?;
        for (i, r) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{r}")?;
        }
        write!(f, ">")
    }
}

/// Dollars invested on each day, out of an initial capital of one.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct StaticStrategy(Vec<f64>);

impl StaticStrategy {
    pub fn new(weights: Vec<f64>) -> Result<Self, MarketError> {
        MixedStrategy::new(weights)
            .map(Self::from)
            .map_err(|e| MarketError::InvalidStrategy(e.to_string()))
    }

    /// Rescales a nonnegative nonzero vector to sum to one.
    pub fn normalized(weights: &[f64]) -> Result<Self, MarketError> {
        MixedStrategy::from_nonnegative(weights, 0.0)
            .map(Self::from)
            .map_err(|e| MarketError::InvalidStrategy(e.to_string()))
    }

    /// The trade-once strategy investing everything on `day` (zero-based).
    pub fn trade_once(n: usize, day: usize) -> Self {
        Self(MixedStrategy::pure(n, day).weights().to_vec())
    }

    pub fn weights(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn to_mixed(&self) -> MixedStrategy {
        MixedStrategy::new(self.0.clone()).expect("static strategy is a probability vector")
    }
}

impl From<MixedStrategy> for StaticStrategy {
    fn from(m: MixedStrategy) -> Self {
        Self(m.weights().to_vec())
    }
}

fn check_len(expected: usize, got: usize) -> Result<(), MarketError> {
    if expected != got {
        return Err(MarketError::LengthMismatch { expected, got });
    }
    Ok(())
}

/// Is every step within the daily bounds, starting from `e_0 = 1`?
pub fn validate_sequence(params: &MarketParams, e: &ExchangeRateSequence) -> Result<bool, MarketError> {
    validate_sequence_with(params, e, ADMISSIBILITY_SLACK)
}

/// As [`validate_sequence`], with a relative slack on each step.
pub fn validate_sequence_with(params: &MarketParams, e: &ExchangeRateSequence, slack: f64) -> Result<bool, MarketError> {
    check_len(params.n(), e.len())?;
    let mut prev = 1.0;
    for &r in e.rates() {
        if !step_within(prev, r, params.bounds(), slack) {
            return Ok(false);
        }
        prev = r;
    }
    Ok(true)
}

pub(crate) fn step_within(prev: f64, next: f64, bounds: ReturnBounds, slack: f64) -> bool {
    let hi = prev * bounds.alpha * (1.0 + slack);
    let lo = prev / bounds.beta * (1.0 - slack);
    next >= lo && next <= hi
}

/// The offline optimum trades everything at the best rate.
pub fn offline_optimum(e: &ExchangeRateSequence) -> f64 {
    e.rates().iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

/// Shares accumulated by a static strategy: `Σ a_i e_i`.
pub fn evaluate_static(s: &StaticStrategy, e: &ExchangeRateSequence) -> Result<f64, MarketError> {
    check_len(s.len(), e.len())?;
    Ok(s.weights().iter().zip(e.rates()).map(|(a, r)| a * r).sum())
}

/// The `n` downturns `e_1..e_n`; downturn `j` (zero-based index `j - 1`)
/// rises by `alpha` for `j` days and then falls by `1/beta` every day.
pub fn downturns(params: &MarketParams) -> Result<Vec<ExchangeRateSequence>, MarketError> {
    (1..=params.n()).map(|j| downturn(params, j)).collect()
}

/// Downturn `j` for `1 ≤ j ≤ n`.
pub fn downturn(params: &MarketParams, j: usize) -> Result<ExchangeRateSequence, MarketError> {
    let n = params.n();
    if j == 0 || j > n {
        return Err(MarketError::InvalidParams(format!("downturn index {j} outside 1..={n}")));
    }
    let mut rates = Vec::with_capacity(n);
    let mut e = 1.0;
    for _ in 0..j {
        e *= params.alpha();
        rates.push(e);
    }
    for _ in j..n {
        e /= params.beta();
        rates.push(e);
    }
    ExchangeRateSequence::new(rates).map_err(|_| MarketError::OutOfRange { n })
}

/// `K(i, j) = alpha^(i-j)` for `i ≤ j`, `beta^(j-i)` otherwise.
pub fn payoff_matrix_k(params: &MarketParams) -> Result<PayoffMatrix, MarketError> {
    let (a, b) = (params.alpha(), params.beta());
    let m = Matrix::from_fn(params.n(), params.n(), |i, j| {
        if i <= j {
            a.powi(-((j - i) as i32))
        } else {
            b.powi(-((i - j) as i32))
        }
    });
    PayoffMatrix::new(m).map_err(|_| MarketError::OutOfRange { n: params.n() })
}

/// `det K = (1 - 1/(alpha beta))^(n-1)`.
pub fn det_k_closed_form(params: &MarketParams) -> f64 {
    (1.0 - 1.0 / (params.alpha() * params.beta())).powi(params.n() as i32 - 1)
}

/// Daily investments of the balanced strategy.
///
/// With `D = n αβ − (n−1)(α+β) + (n−2)`, BAL invests `α(β−1)/D` on the
/// first day, `(α−1)β/D` on the last, and `(α−1)(β−1)/D` on each day in
/// between. Every component is positive.
pub fn bal_weights(params: &MarketParams) -> StaticStrategy {
    let (a, b, n) = (params.alpha(), params.beta(), params.n());
    let d = params.denominator();
    let mut w = vec![(a - 1.0) * (b - 1.0) / d; n];
    w[0] = a * (b - 1.0) / d;
    w[n - 1] = (a - 1.0) * b / d;
    StaticStrategy(w)
}

/// The adversary's optimal mixture over the downturns: BAL's weights with
/// the first and last components exchanged.
pub fn bal_adversary(params: &MarketParams) -> MixedStrategy {
    let mut w = bal_weights(params).0;
    let n = w.len();
    w.swap(0, n - 1);
    MixedStrategy::new(w).expect("BAL weights form a probability vector")
}

/// Exact competitive ratio of BAL, `D / (αβ − 1)`, which is also the best
/// ratio any static strategy can achieve.
pub fn bal_ratio(params: &MarketParams) -> f64 {
    params.denominator() / (params.alpha() * params.beta() - 1.0)
}

/// Growth of [`bal_ratio`] per extra day: `(α−1)(β−1)/(αβ−1)`.
pub fn bal_ratio_increment(bounds: ReturnBounds) -> f64 {
    let (a, b) = (bounds.alpha, bounds.beta);
    (a - 1.0) * (b - 1.0) / (a * b - 1.0)
}

/// Dollar averaging: `1/n` every day.
pub fn da_weights(n: usize) -> Result<StaticStrategy, MarketError> {
    if n < 2 {
        return Err(MarketError::InvalidParams(format!("horizon must be at least 2 days, got {n}")));
    }
    Ok(StaticStrategy(vec![1.0 / n as f64; n]))
}

/// Exact competitive ratio of dollar averaging:
/// `max{ n(1−α⁻¹)/(1−α⁻ⁿ), n(1−β⁻¹)/(1−β⁻ⁿ) }`.
pub fn da_ratio(params: &MarketParams) -> f64 {
    let n = params.n() as f64;
    let term = |f: f64| n * (1.0 - 1.0 / f) / (1.0 - f.powf(-n));
    term(params.alpha()).max(term(params.beta()))
}

/// Worst-case ratio `max_j A(e_j) / S(e_j)` of a static strategy over the
/// downturns, which equals its competitive ratio over all admissible
/// sequences.
pub fn static_ratio_via_downturns(s: &StaticStrategy, params: &MarketParams) -> Result<f64, MarketError> {
    check_len(params.n(), s.len())?;
    let mut worst: f64 = 0.0;
    for (j, e) in downturns(params)?.iter().enumerate() {
        let acc = evaluate_static(s, e)?;
        if !(acc > 0.0) {
            return Err(MarketError::DivisionByZero(j + 1));
        }
        worst = worst.max(offline_optimum(e) / acc);
    }
    Ok(worst)
}

/// `S(e_j)/A(e_j)` for every downturn, i.e. the row vector `sᵀK`.
pub fn downturn_payoffs(s: &StaticStrategy, params: &MarketParams) -> Result<Vec<f64>, MarketError> {
    check_len(params.n(), s.len())?;
    downturns(params)?
        .iter()
        .map(|e| Ok(evaluate_static(s, e)? / offline_optimum(e)))
        .collect()
}

/// One row of a ratio sweep over horizons.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub n: usize,
    pub bal: f64,
    pub da: f64,
}

/// Exact BAL and DA ratios for every horizon in `from..=to` (`from ≥ 2`).
pub fn ratio_sweep(bounds: ReturnBounds, from: usize, to: usize) -> Result<Vec<SweepRow>, MarketError> {
    if from < 2 || to < from {
        return Err(MarketError::InvalidParams(format!("empty or invalid horizon range {from}..={to}")));
    }
    (from..=to)
        .map(|n| {
            let p = bounds.with_days(n)?;
            Ok(SweepRow { n, bal: bal_ratio(&p), da: da_ratio(&p) })
        })
        .collect()
}

/// True when two static strategies coincide componentwise within the slack
/// used for probability vectors.
pub fn same_strategy(a: &StaticStrategy, b: &StaticStrategy) -> bool {
    a.len() == b.len()
        && a.weights().iter().zip(b.weights()).all(|(x, y)| (x - y).abs() <= SIMPLEX_SUM_TOLERANCE)
}
