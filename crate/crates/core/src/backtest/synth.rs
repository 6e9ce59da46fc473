use chrono::{Datelike, Days, Months, NaiveDate, Weekday};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{BacktestError, PricePoint, PriceSeries};
use crate::buyhold::ReturnBounds;

/// Parameters for a seeded synthetic price series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticConfig {
    pub bounds: ReturnBounds,
    pub start: NaiveDate,
    pub months: u32,
    pub start_price: f64,
    pub seed: u64,
}

impl SyntheticConfig {
    pub fn new(bounds: ReturnBounds, seed: u64) -> Self {
        Self {
            bounds,
            start: NaiveDate::from_ymd_opt(1997, 1, 1).expect("valid date"),
            months: 12,
            start_price: 100.0,
            seed,
        }
    }
}

/// Weekday closes whose daily exchange-rate factor is drawn uniformly from
/// `[1/beta, alpha]`, so every step is admissible.
pub fn synthetic_series(cfg: &SyntheticConfig) -> Result<PriceSeries, BacktestError> {
    if !(cfg.start_price.is_finite() && cfg.start_price > 0.0) {
        return Err(BacktestError::NonPositivePrice { date: cfg.start, value: cfg.start_price });
    }
    let first = cfg.start.with_day(1).expect("first of month exists");
    let end = first.checked_add_months(Months::new(cfg.months)).ok_or(BacktestError::EmptySeries)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let (lo, hi) = (1.0 / cfg.bounds.beta, cfg.bounds.alpha);
    let mut points = Vec::new();
    let mut price = cfg.start_price;
    let mut date = cfg.start;
    while date < end {
        if !matches!(date.weekday(), Weekday::Sat | Weekday::Sun) {
            if !points.is_empty() {
                let factor: f64 = rng.gen_range(lo..=hi);
                price /= factor;
            }
            points.push(PricePoint { date, close: price });
        }
        date = date + Days::new(1);
    }
    PriceSeries::new(points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backtest::{bound_violations, segment_monthly, VIOLATION_SLACK};
    use crate::buyhold::preset;

    #[test]
    fn twelve_months_twelve_windows() {
        let cfg = SyntheticConfig::new(preset("taipei").unwrap().bounds(), 7);
        let series = synthetic_series(&cfg).unwrap();
        let seg = segment_monthly(&series);
        assert_eq!(seg.windows.len(), 12);
        assert!(seg.skipped.is_empty());
        for w in &seg.windows {
            assert!((20..=23).contains(&w.len()), "{} has {}", w.label, w.len());
            assert!(bound_violations(w, cfg.bounds, VIOLATION_SLACK).is_empty());
        }
    }

    #[test]
    fn seeded_and_reproducible() {
        let bounds = preset("tokyo").unwrap().bounds();
        let a = synthetic_series(&SyntheticConfig::new(bounds, 1)).unwrap();
        let b = synthetic_series(&SyntheticConfig::new(bounds, 1)).unwrap();
        let c = synthetic_series(&SyntheticConfig::new(bounds, 2)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }
}
