//! End-to-end scenarios: configuration, the model roster run, caching and
//! report files.

mod cache;
mod config;
mod emit;
mod run;

pub use cache::DirCache;
pub use config::{DataSource, Preset, ScenarioConfig, SyntheticSource, CONFIG_VERSION};
pub use emit::{emit_report, load_result, REPORT_FILES};
pub use run::{
    load_scenario, model_stream, run_backtest, BacktestResult, ModelResult, Provenance, RunOptions, VariantEval, RESULT_FORMAT,
    UNRELIABLE_SHARE,
};
