//! Scenario configuration: TOML schema, named presets and validation.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::data::{load_panel, synthetic::synthetic_panel, DataSchema, Month, Panel, WindowSpec, DIVIDEND_YIELD};
use crate::error::{Error, Result};
use crate::metrics::{EvalConfig, MIN_TEST_OBS};
use crate::models::{ModelKind, ModelSpec, TrainingConfig};
use crate::portfolio::{
    ConstraintPreset, RebalanceSchedule, SearchConfig, StrategyConfig, TurnoverConvention, UtilitySpec, WeightConstraint,
    GRID_STEP,
};

/// Schema version accepted by this build.
pub const CONFIG_VERSION: u32 = 1;

/// Where the panel comes from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataSource {
    /// Delimited panel file; relative paths resolve against the config file.
    pub path: Option<PathBuf>,
    /// Generate a synthetic panel instead of reading a file.
    pub synthetic: Option<SyntheticSource>,
    #[serde(default)]
    pub schema: DataSchema,
}

impl Default for DataSource {
    fn default() -> Self {
        DataSource {
            path: None,
            synthetic: Some(SyntheticSource::default()),
            schema: DataSchema::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SyntheticSource {
    pub seed: u64,
    pub start: Month,
    pub end: Month,
}

impl Default for SyntheticSource {
    fn default() -> Self {
        SyntheticSource {
            seed: 7,
            start: Month::new(1945, 1).expect("valid"),
            end: Month::new(2018, 12).expect("valid"),
        }
    }
}

impl DataSource {
    /// Loads the panel, resolving relative paths against `base`.
    pub fn load(&self, base: Option<&Path>) -> Result<Panel> {
        match (&self.path, &self.synthetic) {
            (Some(p), _) => {
                let full = match base {
                    Some(b) if p.is_relative() => b.join(p),
                    _ => p.clone(),
                };
                load_panel(full, &self.schema)
            }
            (None, Some(s)) => {
                let start = s.start.max(self.schema.sample_start);
                let end = s.end.min(self.schema.sample_end);
                Ok(synthetic_panel(s.seed, s.start, s.end).between(start, end))
            }
            (None, None) => Err(Error::Config("data needs either `path` or `synthetic`".into())),
        }
    }
}

/// Named scenario matrices.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    /// 1970–1990 subpanel, small path count and search budget.
    Desk,
    /// Six-month horizon, quarterly rebalancing, from 1955-02.
    Paper6m,
    /// Two-year horizon, annual rebalancing, from 1955-02.
    Paper2y,
    /// Twenty-year rolling windows, quarterly, from 1969-02.
    Paper20y,
}

impl Preset {
    pub const ALL: [Preset; 4] = [Preset::Desk, Preset::Paper6m, Preset::Paper2y, Preset::Paper20y];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Desk => "desk",
            Preset::Paper6m => "paper-6m",
            Preset::Paper2y => "paper-2y",
            Preset::Paper20y => "paper-20y",
        }
    }

    /// Overwrites the scenario fields this preset pins, keeping the data
    /// source, seed and model roster.
    pub fn apply(self, cfg: &mut ScenarioConfig) {
        let m = |y, mo| Month::new(y, mo).expect("valid");
        cfg.name = self.name().into();
        cfg.horizon = 6;
        cfg.interval = 3;
        cfg.window_months = 120;
        cfg.forecast_start = m(1955, 2);
        cfg.end = Some(m(2018, 12));
        cfg.sample_start = None;
        cfg.sample_end = None;
        cfg.n_paths = 10_000;
        cfg.search.budget = 100;
        cfg.search.cadence_months = 12;
        match self {
            Preset::Desk => {
                cfg.sample_start = Some(m(1970, 1));
                cfg.sample_end = Some(m(1990, 12));
                cfg.forecast_start = m(1980, 2);
                cfg.end = Some(m(1990, 12));
                cfg.n_paths = 2_000;
                cfg.search.budget = 20;
                cfg.search.cadence_months = 60;
            }
            Preset::Paper6m => {}
            Preset::Paper2y => {
                cfg.horizon = 24;
                cfg.interval = 12;
            }
            Preset::Paper20y => {
                cfg.window_months = 240;
                cfg.forecast_start = m(1969, 2);
            }
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s.trim())
            .ok_or_else(|| Error::Config(format!("unknown preset `{s}` (desk, paper-6m, paper-2y, paper-20y)")))
    }
}

/// One backtest scenario.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub version: u32,
    pub name: String,
    pub models: Vec<ModelKind>,
    /// Investment horizon in months.
    pub horizon: usize,
    /// Months between rebalances.
    pub interval: usize,
    /// Length of rolling windows.
    pub window_months: usize,
    pub constraint: ConstraintPreset,
    /// Custom `[lower, upper]` weight bounds replacing the preset.
    pub bounds: Option<[f64; 2]>,
    pub tx_cost: f64,
    /// First month forecast and invested.
    pub forecast_start: Month,
    /// Last evaluation month; defaults to the end of the panel.
    pub end: Option<Month>,
    /// Drop panel rows before this month.
    pub sample_start: Option<Month>,
    /// Drop panel rows after this month.
    pub sample_end: Option<Month>,
    pub seed: u64,
    pub n_paths: usize,
    pub grid_step: f64,
    pub turnover: TurnoverConvention,
    pub gamma: f64,
    /// Costs for the transaction-cost variant table.
    pub variant_costs: Vec<f64>,
    pub hac_lag: Option<usize>,
    pub min_test_obs: usize,
    pub search: SearchConfig,
    pub training: TrainingConfig,
    pub data: DataSource,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            version: CONFIG_VERSION,
            name: "custom".into(),
            models: ModelKind::ALL.to_vec(),
            horizon: 6,
            interval: 3,
            window_months: 120,
            constraint: ConstraintPreset::Baseline,
            bounds: None,
            tx_cost: 0.0,
            forecast_start: Month::new(1955, 2).expect("valid"),
            end: None,
            sample_start: None,
            sample_end: None,
            seed: 42,
            n_paths: 10_000,
            grid_step: GRID_STEP,
            turnover: TurnoverConvention::Drifted,
            gamma: 4.0,
            variant_costs: vec![0.0, 0.001, 0.005],
            hac_lag: None,
            min_test_obs: MIN_TEST_OBS,
            search: SearchConfig::default(),
            training: TrainingConfig::default(),
            data: DataSource::default(),
        }
    }
}

impl ScenarioConfig {
    pub fn preset(preset: Preset) -> Self {
        let mut cfg = ScenarioConfig::default();
        preset.apply(&mut cfg);
        cfg
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ScenarioConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        if cfg.version != CONFIG_VERSION {
            return Err(Error::Config(format!(
                "config version {} is not supported (expected {CONFIG_VERSION})",
                cfg.version
            )));
        }
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        ScenarioConfig::from_toml(&text)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Serde(e.to_string()))
    }

    /// SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> Result<String> {
        Ok(hex::encode(Sha256::digest(serde_json::to_vec(self)?)))
    }

    pub fn schedule(&self) -> Result<RebalanceSchedule> {
        RebalanceSchedule::new(self.horizon, self.interval)
    }

    pub fn weight_constraint(&self) -> Result<WeightConstraint> {
        match self.bounds {
            Some([lo, hi]) => WeightConstraint::new(lo, hi),
            None => Ok(self.constraint.bounds()),
        }
    }

    pub fn model_specs(&self) -> Vec<ModelSpec> {
        self.models.iter().map(|k| ModelSpec::standard(*k, self.window_months)).collect()
    }

    pub fn strategy(&self) -> Result<StrategyConfig> {
        let s = StrategyConfig {
            schedule: self.schedule()?,
            constraint: self.weight_constraint()?,
            utility: UtilitySpec::new(self.gamma)?,
            tx_cost: self.tx_cost,
            n_paths: self.n_paths,
            grid_step: self.grid_step,
            turnover: self.turnover,
            training: self.training.clone(),
            search: self.search.clone(),
        };
        s.validate()?;
        Ok(s)
    }

    pub fn eval(&self) -> EvalConfig {
        EvalConfig {
            utility: UtilitySpec { gamma: self.gamma },
            hac_lag: self.hac_lag,
            min_test_obs: self.min_test_obs,
        }
    }

    /// Panel restricted to the configured sample.
    pub fn load_panel(&self, base: Option<&Path>) -> Result<Panel> {
        let panel = self.data.load(base)?;
        let (Some(first), Some(last)) = (panel.start(), panel.end()) else {
            return Ok(panel);
        };
        let from = self.sample_start.map_or(first, |s| s.max(first));
        let to = self.sample_end.map_or(last, |e| e.min(last));
        Ok(panel.between(from, to))
    }

    /// Evaluation end on `panel`.
    pub fn end_month(&self, panel: &Panel) -> Result<Month> {
        match self.end {
            Some(e) => Ok(e),
            None => panel.end().ok_or_else(|| Error::Validation("panel is empty".into())),
        }
    }

    /// Checks the scenario on its own and against `panel`.
    pub fn validate(&self, panel: &Panel) -> Result<()> {
        let invalid = |m: String| Err(Error::Validation(m));
        self.strategy().map_err(|e| Error::Validation(e.to_string()))?;
        if self.window_months == 0 {
            return invalid("window_months must be positive".into());
        }
        if self.variant_costs.iter().any(|c| !(*c >= 0.0 && c.is_finite())) {
            return invalid("variant_costs must be nonnegative".into());
        }
        let mut seen = self.models.clone();
        seen.sort();
        seen.dedup();
        if seen.len() != self.models.len() {
            return invalid("model roster lists a model twice".into());
        }
        let (Some(first), Some(last)) = (panel.start(), panel.end()) else {
            return invalid("panel is empty".into());
        };
        let end = self.end_month(panel)?;
        if end < self.forecast_start {
            return invalid(format!("end {end} precedes forecast start {}", self.forecast_start));
        }
        if self.forecast_start <= first || end > last {
            return invalid(format!(
                "forecast months {}..{end} must lie inside the panel {first}..{last} after its first month",
                self.forecast_start
            ));
        }
        let origin = self.forecast_start.offset(-1);
        for spec in self.model_specs() {
            let needed = match spec.window {
                WindowSpec::Expanding => 3,
                WindowSpec::Rolling { length_months } => length_months,
            };
            let available = origin.since(first) as usize + 1;
            if available < needed {
                return invalid(format!(
                    "{} needs {needed} months before {}, panel has {available}",
                    spec.kind, self.forecast_start
                ));
            }
        }
        if panel.predictor_index(DIVIDEND_YIELD).is_none() && self.models.iter().any(|k| matches!(k, ModelKind::Ols1 | ModelKind::Ols2)) {
            return invalid("single-predictor regressions need the dividend yield column".into());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toml_roundtrip_and_presets() {
        let cfg = ScenarioConfig::preset(Preset::Desk);
        let back = ScenarioConfig::from_toml(&cfg.to_toml().unwrap()).unwrap();
        assert_eq!(cfg, back);
        assert_eq!(cfg.hash().unwrap(), back.hash().unwrap());
        let two = ScenarioConfig::preset(Preset::Paper2y);
        assert_eq!((two.horizon, two.interval), (24, 12));
        assert_eq!(ScenarioConfig::preset(Preset::Paper20y).forecast_start, Month::new(1969, 2).unwrap());
        assert!("paper-7m".parse::<Preset>().is_err());
    }

    #[test]
    fn rejects_unknown_keys_and_versions() {
        assert!(ScenarioConfig::from_toml("version = 1\nbogus = 3").is_err());
        assert!(ScenarioConfig::from_toml("version = 2").is_err());
        let cfg = ScenarioConfig::from_toml("version = 1\nmodels = [\"EH\", \"LSTM\"]\nconstraint = \"long-only\"").unwrap();
        assert_eq!(cfg.models, vec![ModelKind::Eh, ModelKind::Lstm]);
        assert_eq!(cfg.weight_constraint().unwrap(), ConstraintPreset::LongOnly.bounds());
    }

    #[test]
    fn validation_against_the_panel() {
        let cfg = ScenarioConfig::preset(Preset::Desk);
        let panel = cfg.load_panel(None).unwrap();
        cfg.validate(&panel).unwrap();
        let mut early = cfg.clone();
        early.forecast_start = Month::new(1975, 2).unwrap();
        assert!(matches!(early.validate(&panel), Err(Error::Validation(_))));
        let mut bad = cfg;
        bad.interval = 4;
        assert!(bad.validate(&panel).is_err());
    }
}
