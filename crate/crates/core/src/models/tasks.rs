//! Synthetic supervised tasks with known structure, used to check that the
//! networks learn what they should.

use serde::{Deserialize, Serialize};

use super::linear::fit_ols;
use super::network::{Architecture, Dataset};
use super::recurrent::default_layers;
use super::spec::{FeatureSet, HyperParams, TrainingConfig};
use super::train::train_dataset;
use super::trained::Fit;
use crate::data::{Month, Panel};
use crate::error::{Error, Result};
use crate::numerics::{standard_normal, Activation, RngStream};

/// `y_t = x_{t−lag} + noise` with i.i.d. standard normal `x`. Returns the
/// feedforward view (input `x_t`) and the sequence view (inputs
/// `x_{t−seq_len+1..=t}`) of the same `n` targets.
pub fn lag_dependency(seed: u64, n: usize, lag: usize, seq_len: usize, noise: f64) -> Result<(Dataset, Dataset)> {
    if lag >= seq_len {
        return Err(Error::Parameter(format!("lag {lag} must be shorter than the sequence ({seq_len})")));
    }
    let mut rng = RngStream::new(seed, "lag-task").rng();
    let x: Vec<f64> = (0..n + seq_len).map(|_| standard_normal(&mut rng)).collect();
    let mut flat = Vec::with_capacity(n);
    let mut seq = Vec::with_capacity(n * seq_len);
    let mut y = Vec::with_capacity(n);
    for t in seq_len..n + seq_len {
        flat.push(x[t]);
        seq.extend_from_slice(&x[t + 1 - seq_len..=t]);
        y.push(x[t - lag] + noise * standard_normal(&mut rng));
    }
    Ok((Dataset::new(flat, y.clone(), 1)?, Dataset::new(seq, y, seq_len)?))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LongMemoryTrial {
    pub seed: u64,
    pub lstm_mse: f64,
    pub mlp_mse: f64,
}

impl LongMemoryTrial {
    pub fn ratio(&self) -> f64 {
        self.lstm_mse / self.mlp_mse
    }
}

fn split(data: &Dataset, n_fit: usize) -> Result<(Dataset, Dataset)> {
    let w = data.input_len;
    Ok((
        Dataset::new(data.inputs[..n_fit * w].to_vec(), data.targets[..n_fit].to_vec(), w)?,
        Dataset::new(data.inputs[n_fit * w..].to_vec(), data.targets[n_fit..].to_vec(), w)?,
    ))
}

fn mse(arch: &Architecture, params: &crate::numerics::ParameterSet, data: &Dataset, act: Activation) -> Result<f64> {
    let mut total = 0.0;
    for i in 0..data.len() {
        total += (arch.predict(params, data.input(i), act)? - data.targets[i]).powi(2);
    }
    Ok(total / data.len() as f64)
}

/// Trains the recurrent stack and a one-hidden-layer feedforward net on the
/// lag-6 task (`n_fit` samples for fitting, `n_test` held out) and reports
/// both out-of-sample mean squared errors.
pub fn long_memory_trial(seed: u64, n_fit: usize, n_test: usize, hp: &HyperParams) -> Result<LongMemoryTrial> {
    let seq_len = 12;
    let (flat, seq) = lag_dependency(seed, n_fit + n_test, 6, seq_len, 0.1)?;
    let cfg = TrainingConfig {
        target_scale: 1.0,
        seq_len,
        ..TrainingConfig::default()
    };
    let stream = RngStream::new(seed, "long-memory");

    let lstm = Architecture::Recurrent {
        layers: default_layers(),
        seq_len,
    };
    let (fit, test) = split(&seq, n_fit)?;
    let out = train_dataset(&fit, 1, &lstm, hp, &cfg, &stream.child("lstm"))?;
    let lstm_mse = mse(&lstm, &out.params, &test, hp.activation)?;

    let mlp = Architecture::Mlp { hidden: vec![16] };
    let (fit, test) = split(&flat, n_fit)?;
    let out = train_dataset(&fit, 1, &mlp, hp, &cfg, &stream.child("mlp"))?;
    let mlp_mse = mse(&mlp, &out.params, &test, hp.activation)?;

    Ok(LongMemoryTrial { seed, lstm_mse, mlp_mse })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CollapseCheck {
    /// Largest |MLP − OLS| prediction gap over the panel's rows.
    pub max_abs_gap: f64,
    pub epochs_run: usize,
    pub final_val_loss: f64,
}

/// Noiseless `r_{t+1} = 0.002 + 0.5 x_t`: fits OLS and an identity-activation
/// network with one hidden layer on the same rows and compares their
/// predictions at every row.
pub fn linear_collapse(seed: u64, hp: &HyperParams) -> Result<CollapseCheck> {
    let n = 120;
    let mut rng = RngStream::new(seed, "collapse").rng();
    let x: Vec<f64> = (0..n).map(|_| standard_normal(&mut rng)).collect();
    let mut r = vec![0.0];
    r.extend(x[..n - 1].iter().map(|v| 0.002 + 0.5 * v));
    let start = Month::new(2000, 1)?;
    let panel = Panel::new(
        (0..n as i32).map(|i| start.offset(i)).collect(),
        r,
        vec![0.0; n],
        vec!["dp".into()],
        x.clone(),
    )?;
    let ols = fit_ols(&panel, FeatureSet::DividendYield)?;
    let Fit::Linear { intercept, slopes, .. } = &ols.fit else {
        return Err(Error::Numerical("OLS fit is not linear".into()));
    };

    // Same (x_t, r_{t+1}) pairs, unscaled.
    let data = Dataset::new(x[..n - 1].to_vec(), panel.excess_return()[1..].to_vec(), 1)?;
    let arch = Architecture::Mlp { hidden: vec![4] };
    let hp = HyperParams {
        activation: Activation::Identity,
        dropout: 0.0,
        ..*hp
    };
    let cfg = TrainingConfig {
        target_scale: 1.0,
        ..TrainingConfig::default()
    };
    let out = train_dataset(&data, 1, &arch, &hp, &cfg, &RngStream::new(seed, "collapse-net"))?;
    let mut gap = 0.0f64;
    for v in &x {
        let net = arch.predict(&out.params, &[*v], Activation::Identity)?;
        gap = gap.max((net - (intercept + slopes[0] * v)).abs());
    }
    Ok(CollapseCheck {
        max_abs_gap: gap,
        epochs_run: out.epochs_run,
        final_val_loss: out.best_val_loss,
    })
}
