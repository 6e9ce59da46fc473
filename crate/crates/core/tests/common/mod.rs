//! Test-only oracles, independent of the library's solution paths.
#![allow(dead_code)]

use buyhold_core::buyhold::{ExchangeRateSequence, MarketParams, StaticStrategy};
use rand::Rng;

/// All `2^n` sequences whose daily factor is `alpha` or `1/beta`, from `e_0 = 1`.
pub fn extreme_sequences(params: &MarketParams) -> Vec<ExchangeRateSequence> {
    let n = params.n();
    (0u32..1 << n)
        .map(|mask| {
            let mut e = 1.0;
            let rates = (0..n)
                .map(|i| {
                    if mask >> i & 1 == 1 {
                        e *= params.alpha();
                    } else {
                        e /= params.beta();
                    }
                    e
                })
                .collect();
            ExchangeRateSequence::new(rates).unwrap()
        })
        .collect()
}

/// A random admissible sequence with factors uniform in `[1/beta, alpha]`.
pub fn random_admissible<R: Rng>(params: &MarketParams, rng: &mut R) -> ExchangeRateSequence {
    let mut e = 1.0;
    let rates = (0..params.n())
        .map(|_| {
            e *= rng.gen_range(1.0 / params.beta()..=params.alpha());
            e
        })
        .collect();
    ExchangeRateSequence::new(rates).unwrap()
}

pub fn random_strategy<R: Rng>(n: usize, rng: &mut R) -> StaticStrategy {
    let w: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..1.0)).collect();
    StaticStrategy::normalized(&w).unwrap()
}

/// Direct competitive ratio of a static strategy on one sequence.
pub fn ratio_on(s: &StaticStrategy, e: &ExchangeRateSequence) -> f64 {
    let best = e.rates().iter().copied().fold(f64::MIN, f64::max);
    let acc: f64 = s.weights().iter().zip(e.rates()).map(|(a, r)| a * r).sum();
    best / acc
}

/// Worst ratio over the downturns, computed from the definition of the
/// downturns with independent powers rather than the library's generator.
pub fn downturn_max_ratio(s: &[f64], alpha: f64, beta: f64) -> f64 {
    let n = s.len();
    (1..=n)
        .map(|j| {
            let peak = alpha.powi(j as i32);
            let acc: f64 = (1..=n)
                .map(|i| {
                    let e = if i <= j { alpha.powi(i as i32) } else { peak * beta.powi(j as i32 - i as i32) };
                    s[i - 1] * e
                })
                .sum();
            peak / acc
        })
        .fold(0.0, f64::max)
}

/// BAL weights written out from the closed form, for cross-checking.
pub fn bal_formula(alpha: f64, beta: f64, n: usize) -> Vec<f64> {
    let nf = n as f64;
    let d = nf * alpha * beta - (nf - 1.0) * (alpha + beta) + (nf - 2.0);
    (1..=n)
        .map(|i| {
            if i == 1 {
                alpha * (beta - 1.0) / d
            } else if i == n {
                (alpha - 1.0) * beta / d
            } else {
                (alpha - 1.0) * (beta - 1.0) / d
            }
        })
        .collect()
}

/// Euclidean projection onto the probability simplex.
pub fn project_to_simplex(v: &[f64]) -> Vec<f64> {
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cumulative = 0.0;
    let mut theta = 0.0;
    for (k, &uk) in u.iter().enumerate() {
        cumulative += uk;
        let t = (cumulative - 1.0) / (k + 1) as f64;
        if uk - t > 0.0 {
            theta = t;
        }
    }
    v.iter().map(|x| (x - theta).max(0.0)).collect()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
