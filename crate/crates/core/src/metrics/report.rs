//! Per-model evaluation tables over the full sample and its subsamples.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::accuracy::{benchmark_mspe, clark_west, mspe, r2_oos, MIN_TEST_OBS};
use super::economic::{cer, cer_alpha_test, max_drawdown, max_one_month_loss, mean_trade, moments, sharpe_ratio, Moments};
use super::hac::{default_hac_lag, TestResult};
use crate::data::{Month, RecessionCalendar};
use crate::error::Result;
use crate::models::ForecastRecord;
use crate::portfolio::{trades, PortfolioPath, UtilitySpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Subsample {
    Full,
    Expansion,
    Recession,
    /// Decade starting in the given year.
    Decade(i32),
}

impl Subsample {
    pub fn contains(self, month: Month, calendar: &RecessionCalendar) -> bool {
        match self {
            Subsample::Full => true,
            Subsample::Expansion => !calendar.contains(month),
            Subsample::Recession => calendar.contains(month),
            Subsample::Decade(d) => month.decade() == d,
        }
    }

    /// Full sample, expansions, recessions and each decade touched by `months`.
    pub fn standard(months: &[Month]) -> Vec<Subsample> {
        let mut out = vec![Subsample::Full, Subsample::Expansion, Subsample::Recession];
        let mut decades: Vec<i32> = months.iter().map(|m| m.decade()).collect();
        decades.dedup();
        out.extend(decades.into_iter().map(Subsample::Decade));
        out
    }
}

impl fmt::Display for Subsample {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Subsample::Full => f.write_str("full"),
            Subsample::Expansion => f.write_str("expansion"),
            Subsample::Recession => f.write_str("recession"),
            Subsample::Decade(d) => write!(f, "{d}s"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalConfig {
    pub utility: UtilitySpec,
    /// Newey–West lag; `None` uses `⌈1.5·horizon⌉`.
    pub hac_lag: Option<usize>,
    pub min_test_obs: usize,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            utility: UtilitySpec::default(),
            hac_lag: None,
            min_test_obs: MIN_TEST_OBS,
        }
    }
}

impl EvalConfig {
    pub fn lag(&self, horizon: usize) -> usize {
        self.hac_lag.unwrap_or_else(|| default_hac_lag(horizon))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ForecastEval {
    pub model: String,
    pub subsample: Subsample,
    pub n: usize,
    pub mspe: f64,
    pub benchmark_mspe: f64,
    pub r2_oos: Option<f64>,
    /// Reported only when `r2_oos` is positive.
    pub clark_west: Option<TestResult>,
    pub notes: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PortfolioEval {
    pub model: String,
    pub subsample: Subsample,
    pub months: usize,
    pub horizons: usize,
    /// Annualized percent.
    pub cer: Option<f64>,
    pub sharpe: Option<f64>,
    pub moments: Option<Moments>,
    pub max_drawdown: f64,
    pub max_one_month_loss: f64,
    /// Average monthly turnover in percent.
    pub turnover: f64,
    pub alpha_vs_eh: Option<TestResult>,
    pub notes: Vec<String>,
}

/// Forecast accuracy on the records dated inside `sub`.
pub fn forecast_eval(
    records: &[ForecastRecord],
    sub: Subsample,
    calendar: &RecessionCalendar,
    horizon: usize,
    cfg: &EvalConfig,
) -> Option<ForecastEval> {
    let picked: Vec<ForecastRecord> = records.iter().filter(|r| sub.contains(r.date, calendar)).cloned().collect();
    let model = records.first()?.model.clone();
    let mut notes = Vec::new();
    let (Ok(m), Ok(b)) = (mspe(&picked), benchmark_mspe(&picked)) else {
        return None;
    };
    let r2 = r2_oos(&picked).map_err(|e| notes.push(e.to_string())).ok();
    let cw = match r2 {
        Some(v) if v > 0.0 => clark_west(&picked, cfg.lag(horizon), cfg.min_test_obs)
            .map_err(|e| notes.push(format!("clark-west: {e}")))
            .ok(),
        _ => None,
    };
    Some(ForecastEval {
        model,
        subsample: sub,
        n: picked.len(),
        mspe: m,
        benchmark_mspe: b,
        r2_oos: r2,
        clark_west: cw,
        notes,
    })
}

/// Portfolio metrics on the months of `path` inside `sub`; horizons belong
/// to the slice holding their first month. Returns `None` for an empty
/// slice.
pub fn portfolio_eval(
    path: &PortfolioPath,
    eh: Option<&PortfolioPath>,
    sub: Subsample,
    calendar: &RecessionCalendar,
    cfg: &EvalConfig,
) -> Result<Option<PortfolioEval>> {
    let idx: Vec<usize> = (0..path.months.len()).filter(|&i| sub.contains(path.months[i], calendar)).collect();
    if idx.is_empty() {
        return Ok(None);
    }
    let mut notes = Vec::new();
    let ret: Vec<f64> = idx.iter().map(|&i| path.cost_adjusted[i]).collect();
    let all_excess = path.excess_returns();
    let excess: Vec<f64> = idx.iter().map(|&i| all_excess[i]).collect();
    let traded = trades(&path.weights, &path.excess, &path.rf, path.turnover)?;
    let slice_trades: Vec<f64> = idx.iter().filter(|&&i| i > 0).map(|&i| traded[i]).collect();

    let h_idx: Vec<usize> = (0..path.horizon_start.len())
        .filter(|&j| sub.contains(path.horizon_start[j], calendar))
        .collect();
    let gross: Vec<f64> = h_idx.iter().map(|&j| path.horizon_gross[j]).collect();
    let cer_v = if gross.is_empty() {
        notes.push("no complete horizon starts in this slice".into());
        None
    } else {
        cer(&gross, &cfg.utility, path.horizon).map_err(|e| notes.push(format!("cer: {e}"))).ok()
    };

    let alpha = eh.and_then(|eh| {
        let by_start: HashMap<Month, f64> = eh.horizon_start.iter().copied().zip(eh.horizon_utility.iter().copied()).collect();
        let (mut a, mut b) = (Vec::new(), Vec::new());
        for &j in &h_idx {
            if let Some(u) = by_start.get(&path.horizon_start[j]) {
                a.push(path.horizon_utility[j]);
                b.push(*u);
            }
        }
        cer_alpha_test(&a, &b, cfg.lag(path.horizon), cfg.min_test_obs)
            .map_err(|e| notes.push(format!("alpha: {e}")))
            .ok()
    });

    Ok(Some(PortfolioEval {
        model: path.model.clone(),
        subsample: sub,
        months: idx.len(),
        horizons: h_idx.len(),
        cer: cer_v,
        sharpe: sharpe_ratio(&excess).map_err(|e| notes.push(format!("sharpe: {e}"))).ok(),
        moments: moments(&ret).map_err(|e| notes.push(format!("moments: {e}"))).ok(),
        max_drawdown: max_drawdown(&ret),
        max_one_month_loss: max_one_month_loss(&ret)?,
        turnover: mean_trade(&slice_trades),
        alpha_vs_eh: alpha,
        notes,
    }))
}

/// Forecast and portfolio tables for every standard slice. Empty slices
/// are omitted and listed in the returned notes.
pub fn subsample_stats(
    path: &PortfolioPath,
    forecasts: &[ForecastRecord],
    eh: Option<&PortfolioPath>,
    calendar: &RecessionCalendar,
    cfg: &EvalConfig,
) -> Result<(Vec<ForecastEval>, Vec<PortfolioEval>, Vec<String>)> {
    let mut f = Vec::new();
    let mut p = Vec::new();
    let mut notes = Vec::new();
    for sub in Subsample::standard(&path.months) {
        match portfolio_eval(path, eh, sub, calendar, cfg)? {
            Some(e) => p.push(e),
            None => notes.push(format!("{}: {sub} slice is empty", path.model)),
        }
        if let Some(e) = forecast_eval(forecasts, sub, calendar, path.horizon, cfg) {
            f.push(e);
        }
    }
    Ok((f, p, notes))
}
