//! Architecture-independent view of the two network families: parameter
//! initialization, prediction, and mean Huber loss with its gradient over a
//! slice of a dataset.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{mlp, recurrent, recurrent::RecurrentLayer};
use crate::data::{FeatureScaler, Panel};
use crate::error::{Error, Result};
use crate::numerics::{Activation, Huber, ParameterSet};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Architecture {
    Mlp { hidden: Vec<usize> },
    Recurrent { layers: Vec<RecurrentLayer>, seq_len: usize },
}

impl Architecture {
    /// Rows of predictor history one input consumes.
    pub fn seq_len(&self) -> usize {
        match self {
            Architecture::Mlp { .. } => 1,
            Architecture::Recurrent { seq_len, .. } => *seq_len,
        }
    }

    pub fn init<R: Rng + ?Sized>(&self, n_features: usize, rng: &mut R) -> ParameterSet {
        match self {
            Architecture::Mlp { hidden } => mlp::init(n_features, hidden, rng),
            Architecture::Recurrent { layers, .. } => recurrent::init(n_features, layers, rng),
        }
    }

    pub fn draw_masks<R: Rng + ?Sized>(&self, params: &ParameterSet, rate: f64, rng: &mut R) -> Result<Vec<Vec<f64>>> {
        match self {
            Architecture::Mlp { .. } => mlp::draw_masks(params, rate, rng),
            Architecture::Recurrent { layers, .. } => recurrent::draw_masks(layers, rate, rng),
        }
    }

    /// Inference-mode output for one input (a feature vector, or a sequence
    /// of `seq_len` feature vectors oldest first).
    pub fn predict(&self, params: &ParameterSet, input: &[f64], activation: Activation) -> Result<f64> {
        match self {
            Architecture::Mlp { .. } => Ok(mlp::forward(params, input, activation, None)?.0),
            Architecture::Recurrent { layers, .. } => Ok(recurrent::forward(params, layers, input, activation, None)?.0),
        }
    }

    /// Output and gradient of `weight * huber(output − target)` accumulated
    /// into `grads`; returns the unweighted loss.
    #[allow(clippy::too_many_arguments)]
    fn accumulate(
        &self,
        params: &ParameterSet,
        input: &[f64],
        target: f64,
        activation: Activation,
        huber: &Huber,
        masks: Option<&[Vec<f64>]>,
        weight: f64,
        grads: &mut ParameterSet,
    ) -> Result<f64> {
        match self {
            Architecture::Mlp { .. } => {
                let (y, cache) = mlp::forward(params, input, activation, masks)?;
                let u = y - target;
                mlp::backward(params, &cache, activation, weight * huber.grad(u), grads);
                Ok(huber.loss(u))
            }
            Architecture::Recurrent { layers, .. } => {
                let (y, cache) = recurrent::forward(params, layers, input, activation, masks)?;
                let u = y - target;
                recurrent::backward(params, layers, &cache, activation, weight * huber.grad(u), grads);
                Ok(huber.loss(u))
            }
        }
    }

    /// Mean Huber loss over `samples` of `data` and its gradient. With a
    /// dropout `rate` and `rng`, fresh masks are drawn for every sample.
    pub fn loss_and_grad<R: Rng + ?Sized>(
        &self,
        params: &ParameterSet,
        data: &Dataset,
        samples: std::ops::Range<usize>,
        activation: Activation,
        huber: &Huber,
        dropout: Option<(f64, &mut R)>,
    ) -> Result<(f64, ParameterSet)> {
        let n = samples.len();
        if n == 0 {
            return Err(Error::InsufficientData("empty training batch".into()));
        }
        let weight = 1.0 / n as f64;
        let mut grads = params.zeros_like();
        let mut total = 0.0;
        let mut dropout = dropout.filter(|(rate, _)| *rate > 0.0);
        for i in samples {
            let masks = match dropout.as_mut() {
                Some((rate, rng)) => Some(self.draw_masks(params, *rate, &mut **rng)?),
                None => None,
            };
            total += self.accumulate(params, data.input(i), data.targets[i], activation, huber, masks.as_deref(), weight, &mut grads)?;
        }
        Ok((total * weight, grads))
    }

    /// Mean Huber loss in inference mode.
    pub fn loss(
        &self,
        params: &ParameterSet,
        data: &Dataset,
        samples: std::ops::Range<usize>,
        activation: Activation,
        huber: &Huber,
    ) -> Result<f64> {
        let n = samples.len();
        if n == 0 {
            return Err(Error::InsufficientData("empty evaluation set".into()));
        }
        let mut total = 0.0;
        for i in samples {
            total += huber.loss(self.predict(params, data.input(i), activation)? - data.targets[i]);
        }
        Ok(total / n as f64)
    }
}

/// Supervised samples in time order. Each input is `input_len` values.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub inputs: Vec<f64>,
    pub targets: Vec<f64>,
    pub input_len: usize,
}

impl Dataset {
    pub fn new(inputs: Vec<f64>, targets: Vec<f64>, input_len: usize) -> Result<Self> {
        if input_len == 0 || inputs.len() != targets.len() * input_len {
            return Err(Error::Shape(format!(
                "{} input values for {} targets of width {}",
                inputs.len(),
                targets.len(),
                input_len
            )));
        }
        Ok(Dataset {
            inputs,
            targets,
            input_len,
        })
    }

    /// Pairs the scaled predictor history ending at row `s` (`seq_len` rows)
    /// with `target_scale · r_{s+1}`, for every `s` in the window where both
    /// exist.
    pub fn from_window(window: &Panel, scaler: &FeatureScaler, seq_len: usize, target_scale: f64) -> Result<Self> {
        let k = window.n_predictors();
        let scaled = scaler.apply_panel(window);
        let first = seq_len.max(1) - 1;
        let mut inputs = Vec::new();
        let mut targets = Vec::new();
        for s in first..window.len().saturating_sub(1) {
            inputs.extend_from_slice(&scaled[(s + 1 - seq_len.max(1)) * k..(s + 1) * k]);
            targets.push(window.excess_return()[s + 1] * target_scale);
        }
        if targets.is_empty() {
            return Err(Error::InsufficientData(format!(
                "window of {} rows yields no samples with sequence length {}",
                window.len(),
                seq_len
            )));
        }
        Dataset::new(inputs, targets, seq_len.max(1) * k)
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    pub fn input(&self, i: usize) -> &[f64] {
        &self.inputs[i * self.input_len..(i + 1) * self.input_len]
    }
}
