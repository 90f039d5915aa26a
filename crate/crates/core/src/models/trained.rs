use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::network::Architecture;
use super::spec::{FeatureSet, HyperParams, ModelSpec};
use crate::data::{FeatureScaler, Month, Panel, DIVIDEND_YIELD};
use crate::error::{Error, Result};
use crate::numerics::{Activation, ParameterSet};

/// Smallest residual variance handed to the simulator.
pub const VARIANCE_FLOOR: f64 = 1e-10;

/// Version tag written into serialized models.
pub const ARTIFACT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Fit {
    Constant {
        mean: f64,
    },
    Linear {
        intercept: f64,
        slopes: Vec<f64>,
        ridge_used: bool,
    },
    Network {
        arch: Architecture,
        activation: Activation,
        members: Vec<ParameterSet>,
        scaler: FeatureScaler,
        target_scale: f64,
        member_val_losses: Vec<f64>,
    },
}

/// A fitted forecaster. Predictions read the predictors named in
/// `feature_names`; `panel_predictors` records the column layout of the
/// panel it was fit on, which `mean_from_rows` expects.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub spec: ModelSpec,
    pub fit: Fit,
    pub residual_variance: f64,
    /// Mean excess return over the training window.
    pub window_mean: f64,
    pub window_start: Month,
    pub window_end: Month,
    pub panel_predictors: Vec<String>,
    pub feature_names: Vec<String>,
    feature_idx: Vec<usize>,
    pub hyper: Option<HyperParams>,
}

/// Column positions of the features `spec` uses within `panel`.
pub fn feature_columns(panel: &Panel, features: FeatureSet) -> Result<Vec<usize>> {
    match features {
        FeatureSet::All => Ok((0..panel.n_predictors()).collect()),
        FeatureSet::DividendYield => panel
            .predictor_index(DIVIDEND_YIELD)
            .map(|i| vec![i])
            .ok_or_else(|| Error::Schema(format!("panel has no `{DIVIDEND_YIELD}` predictor"))),
    }
}

impl TrainedModel {
    pub(crate) fn assemble(
        spec: ModelSpec,
        fit: Fit,
        residual_variance: f64,
        window: &Panel,
        feature_idx: Vec<usize>,
        hyper: Option<HyperParams>,
    ) -> Result<Self> {
        let n = window.len();
        if n == 0 {
            return Err(Error::InsufficientData("empty training window".into()));
        }
        let window_mean = window.excess_return().iter().sum::<f64>() / n as f64;
        let names = window.predictor_names();
        Ok(TrainedModel {
            spec,
            fit,
            residual_variance: residual_variance.max(VARIANCE_FLOOR),
            window_mean,
            window_start: window.dates()[0],
            window_end: window.dates()[n - 1],
            panel_predictors: names.to_vec(),
            feature_names: feature_idx.iter().map(|&i| names[i].clone()).collect(),
            feature_idx,
            hyper,
        })
    }

    /// Trailing predictor rows a prediction consumes.
    pub fn required_rows(&self) -> usize {
        match &self.fit {
            Fit::Constant { .. } => 0,
            Fit::Linear { .. } => 1,
            Fit::Network { arch, .. } => arch.seq_len(),
        }
    }

    /// Conditional mean of next month's excess return given trailing
    /// predictor rows (oldest first, laid out as `panel_predictors`). Only
    /// the last `required_rows()` rows are read.
    pub fn mean_from_rows(&self, rows: &[&[f64]]) -> Result<f64> {
        let need = self.required_rows();
        if rows.len() < need {
            return Err(Error::WindowUnderflow {
                end: "forecast origin".into(),
                needed: need,
                available: rows.len(),
            });
        }
        let rows = &rows[rows.len() - need..];
        match &self.fit {
            Fit::Constant { mean } => Ok(*mean),
            Fit::Linear { intercept, slopes, .. } => {
                let x = rows[0];
                Ok(intercept + slopes.iter().zip(&self.feature_idx).map(|(b, &j)| b * x[j]).sum::<f64>())
            }
            Fit::Network {
                arch,
                activation,
                members,
                scaler,
                target_scale,
                ..
            } => {
                let k = self.feature_idx.len();
                let mut input = vec![0.0; need * k];
                let mut raw = vec![0.0; k];
                for (t, row) in rows.iter().enumerate() {
                    for (r, &j) in raw.iter_mut().zip(&self.feature_idx) {
                        *r = row[j];
                    }
                    scaler.apply_into(&raw, &mut input[t * k..(t + 1) * k]);
                }
                let mut total = 0.0;
                for p in members {
                    total += arch.predict(p, &input, *activation)?;
                }
                Ok(total / members.len() as f64 / target_scale)
            }
        }
    }

    /// `(mean r̂_{t+1}, residual variance)` from a history ending at `t`.
    pub fn predict(&self, history: &Panel) -> Result<(f64, f64)> {
        let need = self.required_rows();
        if history.len() < need {
            return Err(Error::WindowUnderflow {
                end: history.end().map(|m| m.to_string()).unwrap_or_default(),
                needed: need,
                available: history.len(),
            });
        }
        let mut remapped = Vec::with_capacity(need);
        for i in history.len() - need..history.len() {
            let row = history.row(i);
            let mut full = vec![0.0; self.panel_predictors.len()];
            for &j in &self.feature_idx {
                let name = &self.panel_predictors[j];
                let src = history
                    .predictor_index(name)
                    .ok_or_else(|| Error::Schema(format!("history lacks predictor `{name}`")))?;
                full[j] = row[src];
            }
            remapped.push(full);
        }
        let refs: Vec<&[f64]> = remapped.iter().map(|r| r.as_slice()).collect();
        Ok((self.mean_from_rows(&refs)?, self.residual_variance))
    }

    /// In-window one-step residuals `r_s − r̂_s` aligned with the window's
    /// rows; `None` where the forecast for row `s` lacks history (always for
    /// row 0).
    pub fn fitted_residuals(&self, window: &Panel) -> Result<Vec<Option<f64>>> {
        let need = self.required_rows();
        let rows: Vec<&[f64]> = (0..window.len()).map(|i| window.row(i)).collect();
        let mut out = vec![None; window.len()];
        for s in 1..window.len() {
            if s >= need {
                let pred = self.mean_from_rows(&rows[s - need..s])?;
                out[s] = Some(window.excess_return()[s] - pred);
            }
        }
        Ok(out)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let json = serde_json::to_string(&Artifact {
            format_version: ARTIFACT_VERSION,
            model: self.clone(),
        })?;
        fs::write(path, json).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let a: Artifact = serde_json::from_str(&text)?;
        if a.format_version != ARTIFACT_VERSION {
            return Err(Error::Serde(format!(
                "model artifact version {} is not supported (expected {ARTIFACT_VERSION})",
                a.format_version
            )));
        }
        Ok(a.model)
    }
}

#[derive(Serialize, Deserialize)]
struct Artifact {
    format_version: u32,
    model: TrainedModel,
}

/// One out-of-sample forecast at a rebalance date.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ForecastRecord {
    /// Month being forecast (`t+1`).
    pub date: Month,
    pub model: String,
    pub predicted: f64,
    pub residual_variance: f64,
    pub realized: f64,
    /// Historical-mean forecast over the same training window.
    pub benchmark: f64,
}
