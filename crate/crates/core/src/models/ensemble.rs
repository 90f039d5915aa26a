//! Random hyperparameter search, ensemble fitting and the per-kind fit
//! dispatcher.

use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::linear::{fit_eh_with, fit_ols_with};
use super::network::{Architecture, Dataset};
use super::spec::{HyperBox, HyperParams, ModelSpec, TrainingConfig};
use super::train::{train_dataset, TrainOutcome};
use super::trained::{feature_columns, Fit, TrainedModel};
use crate::data::{FeatureScaler, Panel};
use crate::error::{Error, Result};
use crate::numerics::RngStream;

/// Training inputs for a network spec on one window.
pub struct NetworkInputs {
    pub arch: Architecture,
    pub data: Dataset,
    pub scaler: FeatureScaler,
    pub feature_idx: Vec<usize>,
}

pub fn network_inputs(window: &Panel, spec: &ModelSpec, cfg: &TrainingConfig) -> Result<NetworkInputs> {
    let arch = spec
        .kind
        .architecture(cfg.seq_len)
        .ok_or_else(|| Error::Parameter(format!("{} is not a network", spec.kind)))?;
    let feature_idx = feature_columns(window, spec.features)?;
    let names: Vec<&str> = feature_idx.iter().map(|&j| window.predictor_names()[j].as_str()).collect();
    let features = window.select_predictors(&names)?;
    let scaler = FeatureScaler::fit(&features);
    let data = Dataset::from_window(&features, &scaler, arch.seq_len(), cfg.target_scale)?;
    Ok(NetworkInputs {
        arch,
        data,
        scaler,
        feature_idx,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchOutcome {
    pub best: HyperParams,
    pub best_index: usize,
    pub candidates: Vec<HyperParams>,
    /// Validation loss per candidate, `None` for diverged ones.
    pub val_losses: Vec<Option<f64>>,
}

/// Trains every candidate (in parallel, candidate `i` seeded from
/// `stream/candidate-i`) and keeps the lowest validation loss. Ties go to
/// the earlier candidate.
pub fn evaluate_candidates(
    data: &Dataset,
    n_features: usize,
    arch: &Architecture,
    candidates: &[HyperParams],
    cfg: &TrainingConfig,
    stream: &RngStream,
) -> Result<SearchOutcome> {
    if candidates.is_empty() {
        return Err(Error::Parameter("search budget must be at least 1".into()));
    }
    let val_losses: Vec<Option<f64>> = candidates
        .par_iter()
        .enumerate()
        .map(|(i, hp)| {
            match train_dataset(data, n_features, arch, hp, cfg, &stream.child(format!("candidate-{i}"))) {
                Ok(out) => Some(out.best_val_loss),
                Err(Error::Diverged(msg)) => {
                    warn!("search candidate {i} diverged: {msg}");
                    None
                }
                Err(e) => {
                    warn!("search candidate {i} failed: {e}");
                    None
                }
            }
        })
        .collect();
    let mut best: Option<(usize, f64)> = None;
    for (i, v) in val_losses.iter().enumerate() {
        if let Some(v) = *v {
            if best.is_none_or(|(_, b)| v < b) {
                best = Some((i, v));
            }
        }
    }
    let (best_index, _) = best.ok_or(Error::SearchFailed(candidates.len()))?;
    Ok(SearchOutcome {
        best: candidates[best_index],
        best_index,
        candidates: candidates.to_vec(),
        val_losses,
    })
}

/// Draws `budget` tuples from `hbox` (from `stream/draws`) and evaluates
/// them on the window.
pub fn random_search(
    window: &Panel,
    spec: &ModelSpec,
    hbox: &HyperBox,
    budget: usize,
    cfg: &TrainingConfig,
    stream: &RngStream,
) -> Result<SearchOutcome> {
    if budget == 0 {
        return Err(Error::Parameter("search budget must be at least 1".into()));
    }
    let inputs = network_inputs(window, spec, cfg)?;
    let mut rng = stream.child("draws").rng();
    let candidates: Vec<HyperParams> = (0..budget).map(|_| hbox.sample(&mut rng)).collect();
    evaluate_candidates(
        &inputs.data,
        inputs.feature_idx.len(),
        &inputs.arch,
        &candidates,
        cfg,
        stream,
    )
}

/// Trains `cfg.ensemble_size` members (member `m` seeded from
/// `stream/member-m`) and averages them. One or two failed members are
/// dropped with a warning; three or more fail the fit.
pub fn fit_ensemble(
    window: &Panel,
    spec: &ModelSpec,
    hp: &HyperParams,
    cfg: &TrainingConfig,
    stream: &RngStream,
) -> Result<TrainedModel> {
    let inputs = network_inputs(window, spec, cfg)?;
    let size = cfg.ensemble_size.max(1);
    let n_features = inputs.feature_idx.len();
    let results: Vec<Result<TrainOutcome>> = (0..size)
        .into_par_iter()
        .map(|m| {
            let label = if cfg.shared_member_seed {
                "member-0".to_string()
            } else {
                format!("member-{m}")
            };
            train_dataset(&inputs.data, n_features, &inputs.arch, hp, cfg, &stream.child(label))
        })
        .collect();
    let mut members = Vec::with_capacity(size);
    let mut member_val_losses = Vec::with_capacity(size);
    let mut failed = 0;
    for (m, r) in results.into_iter().enumerate() {
        match r {
            Ok(out) => {
                members.push(out.params);
                member_val_losses.push(out.best_val_loss);
            }
            Err(Error::Diverged(msg)) => {
                warn!("{} ensemble member {m} diverged: {msg}", spec.kind);
                failed += 1;
            }
            Err(e) => return Err(e),
        }
    }
    if failed >= 3 || members.is_empty() {
        return Err(Error::Ensemble { failed, members: size });
    }
    if failed > 0 {
        warn!("{} ensemble averages {} of {size} members", spec.kind, members.len());
    }

    // Residual variance of the ensemble mean over every in-window sample.
    let mut resid = Vec::with_capacity(inputs.data.len());
    for i in 0..inputs.data.len() {
        let mut total = 0.0;
        for p in &members {
            total += inputs.arch.predict(p, inputs.data.input(i), hp.activation)?;
        }
        resid.push((inputs.data.targets[i] - total / members.len() as f64) / cfg.target_scale);
    }
    let n = resid.len() as f64;
    let mean = resid.iter().sum::<f64>() / n;
    let var = if resid.len() > 1 {
        resid.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    let fit = Fit::Network {
        arch: inputs.arch,
        activation: hp.activation,
        members,
        scaler: inputs.scaler,
        target_scale: cfg.target_scale,
        member_val_losses,
    };
    TrainedModel::assemble(spec.clone(), fit, var, window, inputs.feature_idx, Some(*hp))
}

/// Fits any kind on its window. Networks require `hp`.
pub fn fit_model(
    window: &Panel,
    spec: &ModelSpec,
    hp: Option<&HyperParams>,
    cfg: &TrainingConfig,
    stream: &RngStream,
) -> Result<TrainedModel> {
    if spec.kind.is_network() {
        let hp = hp.ok_or_else(|| Error::Parameter(format!("{} needs hyperparameters", spec.kind)))?;
        fit_ensemble(window, spec, hp, cfg, stream)
    } else if spec.kind.is_ols() {
        fit_ols_with(window, spec.clone())
    } else {
        fit_eh_with(window, spec.window)
    }
}
