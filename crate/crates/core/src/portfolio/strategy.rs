//! Walk-forward strategy: refit, forecast, simulate and allocate at each
//! rebalance date, then realize the weights on the actual data.

use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::costs::{apply_transaction_costs, TurnoverConvention};
use super::optimize::{decide, evaluation_hull, utility_curve, AllocationDecision, UtilityCurve, GRID_STEP, RUIN_UTILITY};
use super::utility::{ConstraintPreset, RebalanceSchedule, UtilitySpec, WeightConstraint};
use crate::data::{slice_window, Month, Panel};
use crate::dynamics::{fit_dynamics, simulate_paths};
use crate::error::{Error, Result};
use crate::models::{fit_model, random_search, ForecastRecord, HyperBox, HyperParams, ModelSpec, SearchOutcome, TrainingConfig};
use crate::numerics::RngStream;

/// Version folded into every cache key; bump when step semantics change.
pub const STEP_FORMAT: u32 = 1;

/// Realized factors below this are treated as ruin and floored.
pub const RUIN_FLOOR: f64 = 1e-12;

/// A component failure at one (model, date).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Incident {
    pub model: String,
    pub date: Month,
    pub stage: String,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchConfig {
    /// Candidates drawn per search.
    pub budget: usize,
    /// Months between searches; hyperparameters are reused in between.
    pub cadence_months: usize,
    pub hbox: HyperBox,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            budget: 20,
            cadence_months: 60,
            hbox: HyperBox::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StrategyConfig {
    pub schedule: RebalanceSchedule,
    pub constraint: WeightConstraint,
    pub utility: UtilitySpec,
    pub tx_cost: f64,
    pub n_paths: usize,
    pub grid_step: f64,
    pub turnover: TurnoverConvention,
    pub training: TrainingConfig,
    pub search: SearchConfig,
}

impl Default for StrategyConfig {
    fn default() -> Self {
        StrategyConfig {
            schedule: RebalanceSchedule::QUARTERLY,
            constraint: ConstraintPreset::Baseline.bounds(),
            utility: UtilitySpec::default(),
            tx_cost: 0.0,
            n_paths: 10_000,
            grid_step: GRID_STEP,
            turnover: TurnoverConvention::Drifted,
            training: TrainingConfig::default(),
            search: SearchConfig::default(),
        }
    }
}

impl StrategyConfig {
    pub fn validate(&self) -> Result<()> {
        self.schedule.validate()?;
        self.utility.validate()?;
        WeightConstraint::new(self.constraint.lower, self.constraint.upper)?;
        if !(self.tx_cost >= 0.0 && self.tx_cost.is_finite()) {
            return Err(Error::Parameter(format!("transaction cost {} must be nonnegative", self.tx_cost)));
        }
        if self.n_paths == 0 {
            return Err(Error::Parameter("path count must be at least 1".into()));
        }
        if !(self.grid_step > 0.0 && self.grid_step.is_finite()) {
            return Err(Error::Parameter(format!("grid step {} must be positive", self.grid_step)));
        }
        if self.search.budget == 0 {
            return Err(Error::Parameter("search budget must be at least 1".into()));
        }
        Ok(())
    }

    /// Rebalances between hyperparameter searches.
    pub fn search_every(&self) -> usize {
        (self.search.cadence_months / self.schedule.interval).max(1)
    }
}

/// Rebalance months `t_j = start − 1 + j·interval` with `t_j + 1 ≤ end`.
pub fn rebalance_dates(start: Month, end: Month, interval: usize) -> Vec<Month> {
    let first = start.offset(-1);
    (0..)
        .map(|j| first.offset((j * interval) as i32))
        .take_while(|t| t.succ() <= end)
        .collect()
}

/// Everything one rebalance date produces before a constraint is applied.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RebalanceOutcome {
    pub date: Month,
    pub forecast: Option<ForecastRecord>,
    pub curve: Option<UtilityCurve>,
    pub scenario_stream: RngStream,
    pub incidents: Vec<Incident>,
}

/// Persistent store for step and search results, keyed by content hash.
pub trait StepCache: Sync {
    fn get(&self, key: &str) -> Option<Vec<u8>>;
    fn put(&self, key: &str, bytes: &[u8]) -> Result<()>;
}

#[derive(Clone, Copy, Default)]
pub struct RunControl<'a> {
    pub cache: Option<&'a dyn StepCache>,
    /// Process only this many rebalance dates, then stop with `Interrupted`.
    pub stop_after: Option<usize>,
}

fn cache_key<T: Serialize>(kind: &str, value: &T) -> Result<String> {
    let mut h = Sha256::new();
    h.update(STEP_FORMAT.to_le_bytes());
    h.update(kind.as_bytes());
    h.update(serde_json::to_vec(value)?);
    Ok(format!("{kind}-{}", hex::encode(h.finalize())))
}

fn cached<T, F>(cache: Option<&dyn StepCache>, key: &str, compute: F) -> Result<T>
where
    T: Serialize + for<'de> Deserialize<'de>,
    F: FnOnce() -> Result<T>,
{
    if let Some(c) = cache {
        if let Some(bytes) = c.get(key) {
            match serde_json::from_slice(&bytes) {
                Ok(v) => return Ok(v),
                Err(e) => warn!("ignoring unreadable cache entry {key}: {e}"),
            }
        }
    }
    let v = compute()?;
    if let Some(c) = cache {
        c.put(key, &serde_json::to_vec(&v)?)?;
    }
    Ok(v)
}

fn date_stream(model: &RngStream, date: Month) -> RngStream {
    model.child(date.to_string())
}

/// Random search on the window ending at `date`.
pub fn search_step(panel: &Panel, spec: &ModelSpec, date: Month, cfg: &StrategyConfig, stream: &RngStream) -> Result<SearchOutcome> {
    let window = slice_window(panel, date, spec.window)?;
    random_search(
        &window,
        spec,
        &cfg.search.hbox,
        cfg.search.budget,
        &cfg.training,
        &date_stream(stream, date).child("search"),
    )
}

/// Fits `spec` on the window ending at `date`, forecasts the next month and
/// evaluates the expected-utility curve on simulated paths. Component
/// failures become incidents on the outcome.
pub fn rebalance_step(
    panel: &Panel,
    spec: &ModelSpec,
    date: Month,
    hyper: Option<&HyperParams>,
    cfg: &StrategyConfig,
    stream: &RngStream,
) -> Result<RebalanceOutcome> {
    let window = slice_window(panel, date, spec.window)?;
    let pos = panel.position(date).expect("window end is in the panel");
    if pos + 1 >= panel.len() {
        return Err(Error::Parameter(format!("no realized return after {date}")));
    }
    let model_id = spec.kind.id().to_string();
    let ds = date_stream(stream, date);
    let paths_stream = ds.child("paths");
    let mut out = RebalanceOutcome {
        date,
        forecast: None,
        curve: None,
        scenario_stream: paths_stream.clone(),
        incidents: Vec::new(),
    };
    let incident = |stage: &str, e: Error| Incident {
        model: model_id.clone(),
        date,
        stage: stage.into(),
        message: e.to_string(),
    };

    let model = match fit_model(&window, spec, hyper, &cfg.training, &ds.child("fit")) {
        Ok(m) => m,
        Err(e) => {
            out.incidents.push(incident("fit", e));
            return Ok(out);
        }
    };
    let (predicted, residual_variance) = match model.predict(&window) {
        Ok(p) => p,
        Err(e) => {
            out.incidents.push(incident("forecast", e));
            return Ok(out);
        }
    };
    out.forecast = Some(ForecastRecord {
        date: date.succ(),
        model: model_id.clone(),
        predicted,
        residual_variance,
        realized: panel.excess_return()[pos + 1],
        benchmark: model.window_mean,
    });

    let scenarios = fit_dynamics(&model, &window).and_then(|(ar1, cov)| {
        simulate_paths(&model, &ar1, &cov, &window, cfg.schedule.horizon, cfg.n_paths, &paths_stream)
    });
    let scenarios = match scenarios {
        Ok(s) => s,
        Err(e) => {
            out.incidents.push(incident("simulate", e));
            return Ok(out);
        }
    };
    let (lower, upper) = evaluation_hull(cfg.constraint);
    match utility_curve(&scenarios, lower, upper, cfg.grid_step, &cfg.utility) {
        Ok(c) => out.curve = Some(c),
        Err(e) => out.incidents.push(incident("optimize", e)),
    }
    Ok(out)
}

#[derive(Serialize)]
struct StepKey<'a> {
    window: String,
    date: Month,
    spec: &'a ModelSpec,
    hyper: Option<&'a HyperParams>,
    training: &'a TrainingConfig,
    horizon: usize,
    n_paths: usize,
    grid_step: f64,
    gamma: f64,
    hull: (f64, f64),
    stream: &'a RngStream,
}

#[derive(Serialize)]
struct SearchKey<'a> {
    window: String,
    date: Month,
    spec: &'a ModelSpec,
    training: &'a TrainingConfig,
    search: &'a SearchConfig,
    stream: &'a RngStream,
}

/// Monthly realized strategy returns.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PortfolioPath {
    pub model: String,
    pub months: Vec<Month>,
    pub weights: Vec<f64>,
    /// Realized excess log return of equity.
    pub excess: Vec<f64>,
    pub rf: Vec<f64>,
    /// Portfolio log return before costs.
    pub log_returns: Vec<f64>,
    pub cost_adjusted: Vec<f64>,
    pub tx_cost: f64,
    pub turnover: TurnoverConvention,
    pub horizon: usize,
    pub interval: usize,
    /// First month of each complete holding horizon.
    pub horizon_start: Vec<Month>,
    pub horizon_gross: Vec<f64>,
    pub horizon_utility: Vec<f64>,
}

impl PortfolioPath {
    /// Monthly portfolio return in excess of the risk-free yield, after costs.
    pub fn excess_returns(&self) -> Vec<f64> {
        self.cost_adjusted.iter().zip(&self.rf).map(|(p, f)| p - f).collect()
    }

    /// Running sum of cost-adjusted log returns.
    pub fn cumulative(&self) -> Vec<f64> {
        self.cost_adjusted
            .iter()
            .scan(0.0, |acc, x| {
                *acc += x;
                Some(*acc)
            })
            .collect()
    }
}

/// Holds `segment_weights[j]` over months `t_j+1 .. t_j+interval` from
/// `start` to `end` and computes monthly and horizon returns.
#[allow(clippy::too_many_arguments)]
pub fn realize(
    panel: &Panel,
    model: &str,
    segment_weights: &[f64],
    schedule: RebalanceSchedule,
    start: Month,
    end: Month,
    tx_cost: f64,
    turnover: TurnoverConvention,
    utility: &UtilitySpec,
) -> Result<(PortfolioPath, Vec<Incident>)> {
    let first = panel
        .position(start)
        .ok_or_else(|| Error::Parameter(format!("forecast start {start} outside the panel")))?;
    let last = panel
        .position(end)
        .ok_or_else(|| Error::Parameter(format!("evaluation end {end} outside the panel")))?;
    if last < first {
        return Err(Error::Parameter(format!("evaluation end {end} precedes forecast start {start}")));
    }
    let market = Market {
        months: &panel.dates()[first..=last],
        excess: &panel.excess_return()[first..=last],
        rf: &panel.rf_yield()[first..=last],
    };
    realize_on(market, model, segment_weights, schedule, tx_cost, turnover, utility)
}

/// Realized monthly market series over an evaluation period.
#[derive(Clone, Copy)]
pub struct Market<'a> {
    pub months: &'a [Month],
    pub excess: &'a [f64],
    pub rf: &'a [f64],
}

impl<'a> Market<'a> {
    /// The market series a path was realized on.
    pub fn of(path: &'a PortfolioPath) -> Self {
        Market {
            months: &path.months,
            excess: &path.excess,
            rf: &path.rf,
        }
    }
}

/// `realize` on explicit market series.
pub fn realize_on(
    market: Market<'_>,
    model: &str,
    segment_weights: &[f64],
    schedule: RebalanceSchedule,
    tx_cost: f64,
    turnover: TurnoverConvention,
    utility: &UtilitySpec,
) -> Result<(PortfolioPath, Vec<Incident>)> {
    let n = market.months.len();
    if market.excess.len() != n || market.rf.len() != n {
        return Err(Error::Shape("market series lengths differ".into()));
    }
    if segment_weights.len() != n.div_ceil(schedule.interval) {
        return Err(Error::Shape(format!(
            "{} segment weights for {n} months at interval {}",
            segment_weights.len(),
            schedule.interval
        )));
    }
    let months = market.months.to_vec();
    let excess = market.excess.to_vec();
    let rf = market.rf.to_vec();
    let weights: Vec<f64> = (0..n).map(|i| segment_weights[i / schedule.interval]).collect();
    let mut incidents = Vec::new();
    let log_returns: Vec<f64> = (0..n)
        .map(|i| {
            let rel = 1.0 + weights[i] * excess[i].exp_m1();
            if rel > RUIN_FLOOR {
                rf[i] + (weights[i] * excess[i].exp_m1()).ln_1p()
            } else {
                incidents.push(Incident {
                    model: model.into(),
                    date: months[i],
                    stage: "realize".into(),
                    message: format!("gross factor {rel} with weight {} floored at {RUIN_FLOOR}", weights[i]),
                });
                rf[i] + RUIN_FLOOR.ln()
            }
        })
        .collect();
    let cost_adjusted = apply_transaction_costs(&log_returns, &weights, &excess, &rf, tx_cost, turnover)?;

    let mut horizon_start = Vec::new();
    let mut horizon_gross = Vec::new();
    let mut horizon_utility = Vec::new();
    let mut j = 0;
    while j * schedule.interval + schedule.horizon <= n {
        let a = j * schedule.interval;
        let gross = cost_adjusted[a..a + schedule.horizon].iter().sum::<f64>().exp();
        horizon_start.push(months[a]);
        horizon_gross.push(gross);
        horizon_utility.push(utility.eval(gross).max(RUIN_UTILITY));
        j += 1;
    }
    Ok((
        PortfolioPath {
            model: model.into(),
            months,
            weights,
            excess,
            rf,
            log_returns,
            cost_adjusted,
            tx_cost,
            turnover,
            horizon: schedule.horizon,
            interval: schedule.interval,
            horizon_start,
            horizon_gross,
            horizon_utility,
        },
        incidents,
    ))
}

/// One model's walk-forward run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StrategyRun {
    pub model: String,
    pub spec: ModelSpec,
    pub rebalance_dates: Vec<Month>,
    pub forecasts: Vec<ForecastRecord>,
    /// Successful allocations; failed dates hold cash and appear only in
    /// `segment_weights` and the incident log.
    pub decisions: Vec<AllocationDecision>,
    pub segment_weights: Vec<f64>,
    pub hyper: Vec<Option<HyperParams>>,
    pub failed_dates: usize,
    pub incidents: Vec<Incident>,
    pub path: PortfolioPath,
}

impl StrategyRun {
    pub fn failure_rate(&self) -> f64 {
        if self.rebalance_dates.is_empty() {
            0.0
        } else {
            self.failed_dates as f64 / self.rebalance_dates.len() as f64
        }
    }

    /// Segment weights under `preset`, read from the same decisions; failed
    /// dates stay in cash.
    pub fn preset_weights(&self, preset: ConstraintPreset) -> Vec<f64> {
        let mut out = vec![0.0; self.rebalance_dates.len()];
        for d in &self.decisions {
            if let (Some(date), Some(choice)) = (d.date, d.preset(preset)) {
                if let Some(j) = self.rebalance_dates.iter().position(|t| *t == date) {
                    out[j] = choice.weight;
                }
            }
        }
        out
    }
}

/// Runs `spec` from forecast month `start` through `end`.
pub fn run_strategy(
    panel: &Panel,
    spec: &ModelSpec,
    cfg: &StrategyConfig,
    start: Month,
    end: Month,
    stream: &RngStream,
    control: RunControl<'_>,
) -> Result<StrategyRun> {
    cfg.validate()?;
    if end < start {
        return Err(Error::Parameter(format!("evaluation end {end} precedes forecast start {start}")));
    }
    let dates = rebalance_dates(start, end, cfg.schedule.interval);
    if panel.position(end).is_none() {
        return Err(Error::Parameter(format!("evaluation end {end} outside the panel")));
    }
    slice_window(panel, dates[0], spec.window)?;
    let model_id = spec.kind.id().to_string();
    let todo = control.stop_after.map_or(dates.len(), |k| k.min(dates.len()));
    let cache = control.cache;

    // Hyperparameter searches, one per cadence block.
    let every = cfg.search_every();
    let search_idx: Vec<usize> = if spec.kind.is_network() {
        (0..todo).step_by(every).collect()
    } else {
        Vec::new()
    };
    let searches: Vec<Result<SearchOutcome>> = search_idx
        .par_iter()
        .map(|&j| {
            let date = dates[j];
            let key = cache_key(
                "search",
                &SearchKey {
                    window: slice_window(panel, date, spec.window)?.content_hash(),
                    date,
                    spec,
                    training: &cfg.training,
                    search: &cfg.search,
                    stream,
                },
            )?;
            cached(cache, &key, || search_step(panel, spec, date, cfg, stream))
        })
        .collect();

    let mut incidents = Vec::new();
    let mut hyper: Vec<Option<HyperParams>> = vec![None; todo];
    let mut search_incident: Vec<Option<Incident>> = vec![None; todo];
    let mut current: Option<HyperParams> = None;
    for (s, &j) in search_idx.iter().enumerate() {
        match &searches[s] {
            Ok(o) => current = Some(o.best),
            Err(e) => {
                search_incident[j] = Some(Incident {
                    model: model_id.clone(),
                    date: dates[j],
                    stage: "search".into(),
                    message: format!("{e}; keeping previous hyperparameters"),
                });
            }
        }
        let stop = search_idx.get(s + 1).copied().unwrap_or(todo);
        for h in &mut hyper[j..stop] {
            h.clone_from(&current);
        }
    }

    let (lower, upper) = evaluation_hull(cfg.constraint);
    let steps: Vec<RebalanceOutcome> = (0..todo)
        .into_par_iter()
        .map(|j| {
            let date = dates[j];
            let key = cache_key(
                "step",
                &StepKey {
                    window: slice_window(panel, date, spec.window)?.content_hash(),
                    date,
                    spec,
                    hyper: hyper[j].as_ref(),
                    training: &cfg.training,
                    horizon: cfg.schedule.horizon,
                    n_paths: cfg.n_paths,
                    grid_step: cfg.grid_step,
                    gamma: cfg.utility.gamma,
                    hull: (lower, upper),
                    stream,
                },
            )?;
            cached(cache, &key, || rebalance_step(panel, spec, date, hyper[j].as_ref(), cfg, stream))
        })
        .collect::<Result<_>>()?;
    if todo < dates.len() {
        return Err(Error::Interrupted(format!("{model_id} stopped after {todo} of {} rebalance dates", dates.len())));
    }

    let mut forecasts = Vec::new();
    let mut decisions = Vec::new();
    let mut segment_weights = Vec::with_capacity(dates.len());
    let mut failed_dates = 0;
    for (j, step) in steps.into_iter().enumerate() {
        incidents.extend(search_incident[j].take());
        let failed_before = !step.incidents.is_empty();
        incidents.extend(step.incidents);
        if let Some(f) = step.forecast {
            forecasts.push(f);
        }
        let decision = step
            .curve
            .as_ref()
            .map(|c| decide(c, cfg.constraint, &step.scenario_stream));
        match decision {
            Some(Ok(mut d)) => {
                d.date = Some(step.date);
                segment_weights.push(d.weight);
                decisions.push(d);
            }
            Some(Err(e)) => {
                incidents.push(Incident {
                    model: model_id.clone(),
                    date: step.date,
                    stage: "optimize".into(),
                    message: e.to_string(),
                });
                segment_weights.push(0.0);
                failed_dates += 1;
            }
            None => {
                debug_assert!(failed_before);
                segment_weights.push(0.0);
                failed_dates += 1;
            }
        }
    }
    let (path, realize_incidents) = realize(
        panel,
        &model_id,
        &segment_weights,
        cfg.schedule,
        start,
        end,
        cfg.tx_cost,
        cfg.turnover,
        &cfg.utility,
    )?;
    incidents.extend(realize_incidents);
    for i in &incidents {
        warn!("{} {} [{}]: {}", i.model, i.date, i.stage, i.message);
    }
    Ok(StrategyRun {
        model: model_id,
        spec: spec.clone(),
        rebalance_dates: dates,
        forecasts,
        decisions,
        segment_weights,
        hyper,
        failed_dates,
        incidents,
        path,
    })
}
