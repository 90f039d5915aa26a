//! Forecast accuracy, portfolio performance and the tests comparing them.

mod accuracy;
mod economic;
mod hac;
mod report;

pub use accuracy::{benchmark_mspe, clark_west, clark_west_series, mspe, r2_oos, MIN_TEST_OBS};
pub use economic::{cer, cer_alpha_test, cer_gross, max_drawdown, max_one_month_loss, moments, sharpe_ratio, turnover, Moments};
pub use hac::{default_hac_lag, mean_test, newey_west_variance, TestResult};
pub use report::{forecast_eval, portfolio_eval, subsample_stats, EvalConfig, ForecastEval, PortfolioEval, Subsample};
