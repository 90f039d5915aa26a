use super::hac::{mean_test, TestResult};
use crate::error::{Error, Result};
use crate::models::ForecastRecord;

/// Default smallest sample for the forecast-comparison tests.
pub const MIN_TEST_OBS: usize = 10;

fn nonempty(records: &[ForecastRecord]) -> Result<()> {
    if records.is_empty() {
        return Err(Error::InsufficientData("no forecasts".into()));
    }
    Ok(())
}

/// Mean squared prediction error.
pub fn mspe(records: &[ForecastRecord]) -> Result<f64> {
    nonempty(records)?;
    Ok(records.iter().map(|r| (r.realized - r.predicted).powi(2)).sum::<f64>() / records.len() as f64)
}

/// MSPE of the historical-mean benchmark carried on each record.
pub fn benchmark_mspe(records: &[ForecastRecord]) -> Result<f64> {
    nonempty(records)?;
    Ok(records.iter().map(|r| (r.realized - r.benchmark).powi(2)).sum::<f64>() / records.len() as f64)
}

/// `1 − SSE(model) / SSE(historical mean)`.
pub fn r2_oos(records: &[ForecastRecord]) -> Result<f64> {
    nonempty(records)?;
    let model: f64 = records.iter().map(|r| (r.realized - r.predicted).powi(2)).sum();
    let bench: f64 = records.iter().map(|r| (r.realized - r.benchmark).powi(2)).sum();
    if bench == 0.0 {
        return Err(Error::Undefined("benchmark forecasts are exact".into()));
    }
    Ok(1.0 - model / bench)
}

/// Per-period MSPE-adjusted loss differential
/// `(r − r̄)² − [(r − r̂)² − (r̄ − r̂)²]`.
pub fn clark_west_series(records: &[ForecastRecord]) -> Vec<f64> {
    records
        .iter()
        .map(|r| {
            let e_bench = r.realized - r.benchmark;
            let e_model = r.realized - r.predicted;
            let adj = r.benchmark - r.predicted;
            e_bench * e_bench - (e_model * e_model - adj * adj)
        })
        .collect()
}

/// MSPE-adjusted test that the model improves on the historical mean.
pub fn clark_west(records: &[ForecastRecord], hac_lag: usize, min_obs: usize) -> Result<TestResult> {
    mean_test(&clark_west_series(records), hac_lag, min_obs)
}
