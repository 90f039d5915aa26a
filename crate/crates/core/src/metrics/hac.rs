use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

/// One-sided test of a positive mean.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    /// Sample mean of the tested series.
    pub estimate: f64,
    pub statistic: f64,
    /// `P(Z > statistic)` under the standard normal.
    pub p_value: f64,
    pub n: usize,
    pub hac_lag: usize,
}

/// Newey–West lag for overlapping `horizon`-month outcomes: `⌈1.5·horizon⌉`.
pub fn default_hac_lag(horizon: usize) -> usize {
    (1.5 * horizon as f64).ceil() as usize
}

/// Newey–West (Bartlett kernel) long-run variance of `d`, with the lag
/// capped at `n − 1`.
pub fn newey_west_variance(d: &[f64], lag: usize) -> f64 {
    let n = d.len();
    let mean = d.iter().sum::<f64>() / n as f64;
    let dev: Vec<f64> = d.iter().map(|x| x - mean).collect();
    let autocov = |l: usize| dev[l..].iter().zip(&dev).map(|(a, b)| a * b).sum::<f64>() / n as f64;
    let lag = lag.min(n.saturating_sub(1));
    let mut s = autocov(0);
    for l in 1..=lag {
        s += 2.0 * (1.0 - l as f64 / (lag + 1) as f64) * autocov(l);
    }
    s
}

/// Regresses `d` on a constant and tests `mean > 0` with a HAC standard
/// error. A series with no variation gives statistic 0 when its mean is 0
/// and `±f64::MAX` otherwise.
pub fn mean_test(d: &[f64], lag: usize, min_obs: usize) -> Result<TestResult> {
    let n = d.len();
    if n < min_obs.max(2) {
        return Err(Error::InsufficientData(format!("{n} observations, need {}", min_obs.max(2))));
    }
    if d.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("test series".into()));
    }
    let mean = d.iter().sum::<f64>() / n as f64;
    let var = newey_west_variance(d, lag).max(0.0);
    let se = (var / n as f64).sqrt();
    let statistic = if se > 0.0 {
        (mean / se).clamp(-f64::MAX, f64::MAX)
    } else if mean == 0.0 {
        0.0
    } else {
        mean.signum() * f64::MAX
    };
    let p_value = 1.0 - Normal::standard().cdf(statistic);
    Ok(TestResult {
        estimate: mean,
        statistic,
        p_value,
        n,
        hac_lag: lag.min(n - 1),
    })
}
