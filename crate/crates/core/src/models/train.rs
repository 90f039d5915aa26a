//! Full-batch Adam training with a temporal validation split and early
//! stopping on validation Huber loss.

use serde::{Deserialize, Serialize};

use super::network::{Architecture, Dataset};
use super::spec::{HyperParams, TrainingConfig};
use crate::error::{Error, Result};
use crate::numerics::{AdamState, Huber, ParameterSet, RngStream};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainOutcome {
    pub params: ParameterSet,
    pub best_val_loss: f64,
    /// Epoch whose parameters were kept, 0 for the initialization.
    pub best_epoch: usize,
    pub epochs_run: usize,
}

/// Sizes of the earlier training and later validation segments.
pub fn temporal_split(n: usize, validation_fraction: f64) -> Result<(usize, usize)> {
    if !(0.0..1.0).contains(&validation_fraction) || validation_fraction == 0.0 {
        return Err(Error::Parameter(format!(
            "validation fraction {validation_fraction} outside (0, 1)"
        )));
    }
    let n_val = ((n as f64 * validation_fraction).round() as usize).max(1);
    if n_val >= n {
        return Err(Error::InsufficientData(format!(
            "{n} samples cannot be split into training and validation segments"
        )));
    }
    Ok((n - n_val, n_val))
}

/// Trains one network on `data`. Initialization draws from
/// `stream/init`, dropout masks from `stream/dropout`.
pub fn train_dataset(
    data: &Dataset,
    n_features: usize,
    arch: &Architecture,
    hp: &HyperParams,
    cfg: &TrainingConfig,
    stream: &RngStream,
) -> Result<TrainOutcome> {
    hp.validate()?;
    let huber = Huber::new(cfg.huber_delta)?;
    let (n_train, _) = temporal_split(data.len(), cfg.validation_fraction)?;
    let train = 0..n_train;
    let val = n_train..data.len();

    let mut params = arch.init(n_features, &mut stream.child("init").rng());
    let mut mask_rng = stream.child("dropout").rng();
    let mut adam = AdamState::new(&params, hp.learning_rate, hp.weight_decay);

    let mut best = params.clone();
    let mut best_val = arch.loss(&params, data, val.clone(), hp.activation, &huber)?;
    if !best_val.is_finite() {
        return Err(Error::Diverged("validation loss at initialization".into()));
    }
    let mut best_epoch = 0;
    let mut stale = 0;
    let mut epochs_run = 0;
    for epoch in 1..=hp.max_epochs {
        epochs_run = epoch;
        let (loss, grads) = arch.loss_and_grad(
            &params,
            data,
            train.clone(),
            hp.activation,
            &huber,
            Some((hp.dropout, &mut mask_rng)),
        )?;
        if !loss.is_finite() || !grads.all_finite() {
            return Err(Error::Diverged(format!("training loss non-finite at epoch {epoch}")));
        }
        adam.step(&mut params, &grads)?;
        if !params.all_finite() {
            return Err(Error::Diverged(format!("parameters non-finite at epoch {epoch}")));
        }
        let v = arch.loss(&params, data, val.clone(), hp.activation, &huber)?;
        if !v.is_finite() {
            return Err(Error::Diverged(format!("validation loss non-finite at epoch {epoch}")));
        }
        if v < best_val {
            best_val = v;
            best = params.clone();
            best_epoch = epoch;
            stale = 0;
        } else {
            stale += 1;
            if stale > hp.patience {
                break;
            }
        }
    }
    Ok(TrainOutcome {
        params: best,
        best_val_loss: best_val,
        best_epoch,
        epochs_run,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{standard_normal, Activation};

    fn linear_task(seed: u64, n: usize, noise: f64) -> Dataset {
        let mut rng = RngStream::new(seed, "linear-task").rng();
        let xs: Vec<f64> = (0..n).map(|_| standard_normal(&mut rng)).collect();
        let ys = xs.iter().map(|x| 2.0 * x + noise * standard_normal(&mut rng)).collect();
        Dataset::new(xs, ys, 1).unwrap()
    }

    fn quick_hp() -> HyperParams {
        HyperParams {
            learning_rate: 0.01,
            max_epochs: 1000,
            patience: 50,
            ..HyperParams::default()
        }
    }

    #[test]
    fn split_sizes() {
        assert_eq!(temporal_split(100, 0.2).unwrap(), (80, 20));
        assert_eq!(temporal_split(3, 0.2).unwrap(), (2, 1));
        assert!(temporal_split(1, 0.2).is_err());
    }

    #[test]
    fn determinism() {
        let d = linear_task(1, 60, 0.01);
        let arch = Architecture::Mlp { hidden: vec![16] };
        let hp = HyperParams {
            max_epochs: 30,
            dropout: 0.3,
            ..quick_hp()
        };
        let s = RngStream::new(7, "det");
        let a = train_dataset(&d, 1, &arch, &hp, &TrainingConfig::default(), &s).unwrap();
        let b = train_dataset(&d, 1, &arch, &hp, &TrainingConfig::default(), &s).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn patience_zero_keeps_initialization_when_first_step_hurts() {
        // Training segment follows y = 2x, validation y = −2x: any step that
        // fits the training data worsens the validation loss.
        let xs: Vec<f64> = (0..50).map(|i| 0.5 + 0.4 * (i as f64).sin()).collect();
        let ys: Vec<f64> = xs
            .iter()
            .enumerate()
            .map(|(i, x)| if i < 40 { 2.0 * x } else { -2.0 * x })
            .collect();
        let d = Dataset::new(xs, ys, 1).unwrap();
        let arch = Architecture::Mlp { hidden: vec![] };
        let hp = HyperParams {
            patience: 0,
            activation: Activation::Identity,
            ..quick_hp()
        };
        let s = RngStream::new(3, "p0");
        let out = train_dataset(&d, 1, &arch, &hp, &TrainingConfig::default(), &s).unwrap();
        let init = arch.init(1, &mut s.child("init").rng());
        assert_eq!(out.best_epoch, 0);
        assert_eq!(out.epochs_run, 1);
        assert_eq!(out.params, init);
    }

    #[test]
    fn exploding_learning_rate_reports_divergence() {
        let d = linear_task(2, 20, 0.1);
        let arch = Architecture::Mlp { hidden: vec![4] };
        let hp = HyperParams {
            learning_rate: 1e300,
            activation: Activation::Identity,
            ..quick_hp()
        };
        let r = train_dataset(&d, 1, &arch, &hp, &TrainingConfig::default(), &RngStream::new(1, "x"));
        assert!(matches!(r, Err(Error::Diverged(_))));
    }
}
