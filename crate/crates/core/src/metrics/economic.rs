use serde::{Deserialize, Serialize};

use super::hac::{mean_test, TestResult};
use crate::error::{Error, Result};
use crate::portfolio::{trades, TurnoverConvention, UtilitySpec};

/// Certainty-equivalent gross return of horizon gross returns `R_1..R_M`.
pub fn cer_gross(gross: &[f64], utility: &UtilitySpec) -> Result<f64> {
    utility.validate()?;
    if gross.is_empty() {
        return Err(Error::InsufficientData("no horizon returns".into()));
    }
    if let Some(r) = gross.iter().find(|r| !(**r > 0.0)) {
        return Err(Error::Domain(format!("nonpositive gross return {r}")));
    }
    let g = utility.gamma;
    let mean_u = gross.iter().map(|r| utility.eval(*r)).sum::<f64>() / gross.len() as f64;
    let base = (1.0 - g) * mean_u;
    if !(base > 0.0) {
        return Err(Error::Domain(format!("mean utility {mean_u} has no certainty equivalent")));
    }
    Ok(base.powf(1.0 / (1.0 - g)))
}

/// Annualized certainty-equivalent return in percent, for returns measured
/// over `horizon` months.
pub fn cer(gross: &[f64], utility: &UtilitySpec, horizon: usize) -> Result<f64> {
    let c = cer_gross(gross, utility)?;
    Ok(100.0 * (c.powf(12.0 / horizon as f64) - 1.0))
}

/// Monthly Sharpe ratio of excess returns (sample sd). A series that is
/// identically zero, such as an all-cash strategy, has ratio 0.
pub fn sharpe_ratio(excess: &[f64]) -> Result<f64> {
    let n = excess.len();
    if n < 2 {
        return Err(Error::InsufficientData(format!("{n} months, need 2")));
    }
    if excess.iter().all(|x| *x == 0.0) {
        return Ok(0.0);
    }
    let mean = excess.iter().sum::<f64>() / n as f64;
    let var = excess.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    if !(var > 0.0) {
        return Err(Error::Undefined("excess returns have zero variance".into()));
    }
    Ok(mean / var.sqrt())
}

/// Test that model horizon utilities beat the benchmark's on average.
pub fn cer_alpha_test(model: &[f64], benchmark: &[f64], hac_lag: usize, min_obs: usize) -> Result<TestResult> {
    if model.len() != benchmark.len() {
        return Err(Error::Shape(format!("{} vs {} horizon utilities", model.len(), benchmark.len())));
    }
    let d: Vec<f64> = model.iter().zip(benchmark).map(|(a, b)| a - b).collect();
    mean_test(&d, hac_lag, min_obs)
}

/// Largest fall of summed log returns (×100) from a running peak, the
/// starting level 0 included.
pub fn max_drawdown(log_returns: &[f64]) -> f64 {
    let mut level = 0.0;
    let mut peak: f64 = 0.0;
    let mut worst: f64 = 0.0;
    for x in log_returns {
        level += 100.0 * x;
        peak = peak.max(level);
        worst = worst.max(peak - level);
    }
    worst
}

/// `−min(returns) × 100`.
pub fn max_one_month_loss(log_returns: &[f64]) -> Result<f64> {
    let min = log_returns.iter().copied().reduce(f64::min).ok_or_else(|| Error::InsufficientData("no returns".into()))?;
    Ok(-100.0 * min)
}

/// Mean absolute monthly trade ×100, skipping the initial purchase.
pub fn turnover(weights: &[f64], r: &[f64], rf: &[f64], convention: TurnoverConvention) -> Result<f64> {
    let t = trades(weights, r, rf, convention)?;
    Ok(mean_trade(&t[t.len().min(1)..]))
}

pub(crate) fn mean_trade(trades: &[f64]) -> f64 {
    if trades.is_empty() {
        0.0
    } else {
        100.0 * trades.iter().sum::<f64>() / trades.len() as f64
    }
}

/// Mean, sd, skewness and raw kurtosis of returns ×100.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub mean: f64,
    pub sd: f64,
    pub skewness: f64,
    pub kurtosis: f64,
}

/// Moments of `returns × 100`; sd uses `n − 1`, skewness and kurtosis the
/// population central moments.
pub fn moments(returns: &[f64]) -> Result<Moments> {
    let n = returns.len();
    if n < 2 {
        return Err(Error::InsufficientData(format!("{n} months, need 2")));
    }
    let x: Vec<f64> = returns.iter().map(|r| 100.0 * r).collect();
    let mean = x.iter().sum::<f64>() / n as f64;
    let central = |k: i32| x.iter().map(|v| (v - mean).powi(k)).sum::<f64>() / n as f64;
    let m2 = central(2);
    if !(m2 > 0.0) {
        return Err(Error::Undefined("returns have zero variance".into()));
    }
    Ok(Moments {
        mean,
        sd: (m2 * n as f64 / (n - 1) as f64).sqrt(),
        skewness: central(3) / m2.powf(1.5),
        kurtosis: central(4) / (m2 * m2),
    })
}
