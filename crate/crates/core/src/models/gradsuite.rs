//! Finite-difference checks of the hand-derived network gradients.

use serde::{Deserialize, Serialize};

use super::network::{Architecture, Dataset};
use super::recurrent::default_layers;
use crate::error::Result;
use crate::numerics::{grad_check, standard_normal, uniform, Activation, Huber, RngStream};

/// Relative error every case must stay under.
pub const TOLERANCE: f64 = 1e-5;

const EPS: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GradCheckReport {
    pub case: String,
    pub seeds: usize,
    pub parameters: usize,
    /// Worst relative error over all seeds.
    pub max_rel_error: f64,
}

impl GradCheckReport {
    pub fn passed(&self) -> bool {
        self.max_rel_error < TOLERANCE
    }
}

/// Cases checked: the three feedforward depths and the recurrent stack
/// (5 unrolled steps), each with sigmoid and relu.
pub fn cases() -> Vec<(String, Architecture, Activation)> {
    let mut out = Vec::new();
    for act in [Activation::Sigmoid, Activation::Relu] {
        for (name, hidden) in [("NN1", vec![16]), ("NN2", vec![32, 16]), ("NN3", vec![32, 16, 8])] {
            out.push((format!("{name}/{act}"), Architecture::Mlp { hidden }, act));
        }
        out.push((
            format!("LSTM/{act}"),
            Architecture::Recurrent {
                layers: default_layers(),
                seq_len: 5,
            },
            act,
        ));
    }
    out
}

/// Runs one case at `seeds` random points: random parameters, a 3-sample
/// batch of random inputs and targets, Huber loss, and fixed dropout masks.
pub fn check_case(name: &str, arch: &Architecture, activation: Activation, seeds: usize) -> Result<GradCheckReport> {
    let n_features = 4;
    let huber = Huber::new(1.0)?;
    let mut worst = 0.0f64;
    let mut parameters = 0;
    for seed in 0..seeds as u64 {
        let stream = RngStream::new(seed, format!("gradcheck/{name}"));
        let mut rng = stream.child("point").rng();
        let mut point = arch.init(n_features, &mut rng);
        for t in point.tensors.iter_mut().filter(|t| t.name.ends_with(".b")) {
            t.data.iter_mut().for_each(|v| *v = uniform(&mut rng, -0.5, 0.5));
        }
        parameters = point.num_values();
        let input_len = n_features * arch.seq_len();
        let inputs = (0..3 * input_len).map(|_| standard_normal(&mut rng)).collect();
        let targets = (0..3).map(|_| 2.0 * standard_normal(&mut rng)).collect();
        let data = Dataset::new(inputs, targets, input_len)?;
        let masks = stream.child("masks");
        let err = grad_check(
            |p| arch.loss_and_grad(p, &data, 0..3, activation, &huber, Some((0.3, &mut masks.rng()))),
            &point,
            EPS,
        )?;
        worst = worst.max(err);
    }
    Ok(GradCheckReport {
        case: name.to_string(),
        seeds,
        parameters,
        max_rel_error: worst,
    })
}

pub fn gradient_suite(seeds: usize) -> Result<Vec<GradCheckReport>> {
    cases()
        .iter()
        .map(|(name, arch, act)| check_case(name, arch, *act, seeds))
        .collect()
}
