use std::path::{Path, PathBuf};

use log::info;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::cache::DirCache;
use super::config::ScenarioConfig;
use crate::data::{Month, Panel, RecessionCalendar};
use crate::error::Result;
use crate::metrics::{cer, max_drawdown, sharpe_ratio, subsample_stats, turnover, ForecastEval, PortfolioEval};
use crate::models::{ModelKind, ModelSpec};
use crate::numerics::RngStream;
use crate::portfolio::{realize_on, run_strategy, ConstraintPreset, Market, RunControl, StepCache, StrategyRun};

/// Version of the result document layout.
pub const RESULT_FORMAT: u32 = 1;

/// Share of failed rebalance dates above which a model is flagged.
pub const UNRELIABLE_SHARE: f64 = 0.05;

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    /// Directory for per-step results; a rerun with the same directory
    /// resumes where an earlier one stopped.
    pub cache_dir: Option<PathBuf>,
    /// Stop every model after this many rebalance dates.
    pub stop_after: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub format_version: u32,
    pub code_version: String,
    pub scenario: String,
    pub config_hash: String,
    pub panel_hash: String,
    pub seed: u64,
    pub forecast_start: Month,
    pub end: Month,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelResult {
    pub run: StrategyRun,
    pub forecast_eval: Vec<ForecastEval>,
    pub portfolio_eval: Vec<PortfolioEval>,
    /// More than 5% of rebalance dates failed.
    pub unreliable: bool,
}

impl ModelResult {
    pub fn model(&self) -> &str {
        &self.run.model
    }

    pub fn portfolio(&self, sub: crate::metrics::Subsample) -> Option<&PortfolioEval> {
        self.portfolio_eval.iter().find(|e| e.subsample == sub)
    }

    pub fn forecast(&self, sub: crate::metrics::Subsample) -> Option<&ForecastEval> {
        self.forecast_eval.iter().find(|e| e.subsample == sub)
    }
}

/// Full-sample performance of the same decisions under another constraint
/// preset or cost level.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VariantEval {
    pub model: String,
    pub constraint: ConstraintPreset,
    pub tx_cost: f64,
    pub cer: Option<f64>,
    pub sharpe: Option<f64>,
    pub turnover: f64,
    pub max_drawdown: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BacktestResult {
    pub provenance: Provenance,
    pub config: ScenarioConfig,
    pub models: Vec<ModelResult>,
    /// Historical-mean benchmark run used for the utility tests when EH is
    /// not on the roster.
    pub benchmark: Option<StrategyRun>,
    pub variants: Vec<VariantEval>,
    pub notes: Vec<String>,
}

impl BacktestResult {
    pub fn model(&self, id: &str) -> Option<&ModelResult> {
        self.models.iter().find(|m| m.model() == id)
    }

    fn eh_run(&self) -> Option<&StrategyRun> {
        self.model(ModelKind::Eh.id()).map(|m| &m.run).or(self.benchmark.as_ref())
    }

    /// Serialized form; equal results give equal bytes.
    pub fn to_json(&self) -> Result<Vec<u8>> {
        Ok(serde_json::to_vec_pretty(self)?)
    }

    pub fn from_json(bytes: &[u8]) -> Result<Self> {
        Ok(serde_json::from_slice(bytes)?)
    }

    /// Recomputes every evaluation table from the stored runs.
    pub fn recompute(&mut self, calendar: &RecessionCalendar) -> Result<()> {
        let eval = self.config.eval();
        let eh_path = self.eh_run().map(|r| r.path.clone());
        let mut notes = Vec::new();
        for m in &mut self.models {
            let (f, p, n) = subsample_stats(&m.run.path, &m.run.forecasts, eh_path.as_ref(), calendar, &eval)?;
            m.forecast_eval = f;
            m.portfolio_eval = p;
            m.unreliable = m.run.failure_rate() > UNRELIABLE_SHARE;
            if m.unreliable {
                notes.push(format!(
                    "{} unreliable: {} of {} rebalance dates failed",
                    m.run.model,
                    m.run.failed_dates,
                    m.run.rebalance_dates.len()
                ));
            }
            notes.extend(n);
        }
        self.variants = variants(&self.config, &self.models)?;
        self.notes = notes;
        Ok(())
    }
}

fn variants(config: &ScenarioConfig, models: &[ModelResult]) -> Result<Vec<VariantEval>> {
    let strategy = config.strategy()?;
    let mut out = Vec::new();
    for m in models {
        let run = &m.run;
        for preset in ConstraintPreset::ALL {
            let w = run.preset_weights(preset);
            for &tau in &config.variant_costs {
                let (path, _) = realize_on(
                    Market::of(&run.path),
                    &run.model,
                    &w,
                    strategy.schedule,
                    tau,
                    strategy.turnover,
                    &strategy.utility,
                )?;
                out.push(VariantEval {
                    model: run.model.clone(),
                    constraint: preset,
                    tx_cost: tau,
                    cer: cer(&path.horizon_gross, &strategy.utility, path.horizon).ok(),
                    sharpe: sharpe_ratio(&path.excess_returns()).ok(),
                    turnover: turnover(&path.weights, &path.excess, &path.rf, path.turnover)?,
                    max_drawdown: max_drawdown(&path.cost_adjusted),
                });
            }
        }
    }
    Ok(out)
}

/// Stream every draw of `spec` derives from.
pub fn model_stream(seed: u64, spec: &ModelSpec) -> RngStream {
    RngStream::new(seed, format!("model/{}", spec.kind.id()))
}

/// Runs every model of the roster and evaluates it.
pub fn run_backtest(panel: &Panel, config: &ScenarioConfig, options: &RunOptions) -> Result<BacktestResult> {
    config.validate(panel)?;
    let strategy = config.strategy()?;
    let end = config.end_month(panel)?;
    let cache = options.cache_dir.as_deref().map(DirCache::open).transpose()?;
    let control = RunControl {
        cache: cache.as_ref().map(|c| c as &dyn StepCache),
        stop_after: options.stop_after,
    };
    let mut specs = config.model_specs();
    let need_benchmark = !specs.is_empty() && !config.models.contains(&ModelKind::Eh);
    if need_benchmark {
        specs.push(ModelSpec::standard(ModelKind::Eh, config.window_months));
    }
    let mut runs: Vec<StrategyRun> = specs
        .par_iter()
        .map(|spec| {
            info!("running {}", spec.kind);
            run_strategy(panel, spec, &strategy, config.forecast_start, end, &model_stream(config.seed, spec), control)
        })
        .collect::<Result<_>>()?;
    let benchmark = if need_benchmark { runs.pop() } else { None };

    let mut result = BacktestResult {
        provenance: Provenance {
            format_version: RESULT_FORMAT,
            code_version: env!("CARGO_PKG_VERSION").into(),
            scenario: config.name.clone(),
            config_hash: config.hash()?,
            panel_hash: panel.content_hash(),
            seed: config.seed,
            forecast_start: config.forecast_start,
            end,
        },
        config: config.clone(),
        models: runs
            .into_iter()
            .map(|run| ModelResult {
                run,
                forecast_eval: Vec::new(),
                portfolio_eval: Vec::new(),
                unreliable: false,
            })
            .collect(),
        benchmark,
        variants: Vec::new(),
        notes: Vec::new(),
    };
    result.recompute(&RecessionCalendar::nber())?;
    Ok(result)
}

/// Loads a configuration and its panel, resolving the data path against
/// the configuration's directory.
pub fn load_scenario(path: impl AsRef<Path>) -> Result<(ScenarioConfig, Panel)> {
    let path = path.as_ref();
    let cfg = ScenarioConfig::load(path)?;
    let panel = cfg.load_panel(path.parent())?;
    Ok((cfg, panel))
}
