use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::network::Architecture;
use super::recurrent::default_layers;
use crate::data::WindowSpec;
use crate::error::{Error, Result};
use crate::numerics::{uniform, Activation};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum ModelKind {
    Eh,
    Ols1,
    Ols2,
    Ols3,
    Ols4,
    Nn1,
    Nn2,
    Nn3,
    Lstm,
}

impl ModelKind {
    pub const ALL: [ModelKind; 9] = [
        ModelKind::Eh,
        ModelKind::Ols1,
        ModelKind::Ols2,
        ModelKind::Ols3,
        ModelKind::Ols4,
        ModelKind::Nn1,
        ModelKind::Nn2,
        ModelKind::Nn3,
        ModelKind::Lstm,
    ];

    pub fn id(self) -> &'static str {
        match self {
            ModelKind::Eh => "EH",
            ModelKind::Ols1 => "OLS1",
            ModelKind::Ols2 => "OLS2",
            ModelKind::Ols3 => "OLS3",
            ModelKind::Ols4 => "OLS4",
            ModelKind::Nn1 => "NN1",
            ModelKind::Nn2 => "NN2",
            ModelKind::Nn3 => "NN3",
            ModelKind::Lstm => "LSTM",
        }
    }

    pub fn is_network(self) -> bool {
        matches!(self, ModelKind::Nn1 | ModelKind::Nn2 | ModelKind::Nn3 | ModelKind::Lstm)
    }

    pub fn is_ols(self) -> bool {
        matches!(self, ModelKind::Ols1 | ModelKind::Ols2 | ModelKind::Ols3 | ModelKind::Ols4)
    }

    /// Network layout, `None` for EH and OLS.
    pub fn architecture(self, seq_len: usize) -> Option<Architecture> {
        Some(match self {
            ModelKind::Nn1 => Architecture::Mlp { hidden: vec![16] },
            ModelKind::Nn2 => Architecture::Mlp { hidden: vec![32, 16] },
            ModelKind::Nn3 => Architecture::Mlp { hidden: vec![32, 16, 8] },
            ModelKind::Lstm => Architecture::Recurrent {
                layers: default_layers(),
                seq_len,
            },
            _ => return None,
        })
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ModelKind::ALL
            .into_iter()
            .find(|k| k.id().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::Parameter(format!("unknown model `{s}`")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FeatureSet {
    /// Dividend yield only.
    DividendYield,
    /// Every predictor in the panel.
    All,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub kind: ModelKind,
    pub window: WindowSpec,
    pub features: FeatureSet,
}

impl ModelSpec {
    /// Standard roster entry: OLS1 and OLS3 expand, OLS2, OLS4 and the
    /// networks roll over `rolling_months`, EH uses all history.
    pub fn standard(kind: ModelKind, rolling_months: usize) -> Self {
        let rolling = WindowSpec::Rolling {
            length_months: rolling_months,
        };
        let (window, features) = match kind {
            ModelKind::Eh => (WindowSpec::Expanding, FeatureSet::All),
            ModelKind::Ols1 => (WindowSpec::Expanding, FeatureSet::DividendYield),
            ModelKind::Ols2 => (rolling, FeatureSet::DividendYield),
            ModelKind::Ols3 => (WindowSpec::Expanding, FeatureSet::All),
            ModelKind::Ols4 => (rolling, FeatureSet::All),
            _ => (rolling, FeatureSet::All),
        };
        ModelSpec { kind, window, features }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HyperParams {
    pub learning_rate: f64,
    pub weight_decay: f64,
    pub dropout: f64,
    pub activation: Activation,
    pub max_epochs: usize,
    pub patience: usize,
}

impl HyperParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Parameter(format!("learning rate {} must be positive", self.learning_rate)));
        }
        if !(self.weight_decay >= 0.0 && self.weight_decay.is_finite()) {
            return Err(Error::Parameter(format!("weight decay {} must be nonnegative", self.weight_decay)));
        }
        crate::numerics::check_rate(self.dropout)?;
        if self.max_epochs == 0 {
            return Err(Error::Parameter("max epochs must be positive".into()));
        }
        Ok(())
    }
}

impl Default for HyperParams {
    fn default() -> Self {
        HyperParams {
            learning_rate: 0.005,
            weight_decay: 0.0,
            dropout: 0.0,
            activation: Activation::Relu,
            max_epochs: 1000,
            patience: 50,
        }
    }
}

/// Box the random search samples from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HyperBox {
    pub learning_rate: (f64, f64),
    pub weight_decay: (f64, f64),
    pub dropout: (f64, f64),
    pub activations: Vec<Activation>,
    pub max_epochs: usize,
    pub patience: usize,
}

impl Default for HyperBox {
    fn default() -> Self {
        HyperBox {
            learning_rate: (0.001, 0.02),
            weight_decay: (0.0, 0.001),
            dropout: (0.0, 0.6),
            activations: vec![Activation::Sigmoid, Activation::Relu],
            max_epochs: 1000,
            patience: 50,
        }
    }
}

impl HyperBox {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> HyperParams {
        let learning_rate = uniform(rng, self.learning_rate.0, self.learning_rate.1);
        let weight_decay = uniform(rng, self.weight_decay.0, self.weight_decay.1);
        let dropout = uniform(rng, self.dropout.0, self.dropout.1);
        let activation = self.activations[rng.random_range(0..self.activations.len())];
        HyperParams {
            learning_rate,
            weight_decay,
            dropout,
            activation,
            max_epochs: self.max_epochs,
            patience: self.patience,
        }
    }

    pub fn contains(&self, hp: &HyperParams) -> bool {
        let within = |v: f64, (lo, hi): (f64, f64)| lo <= v && v <= hi;
        within(hp.learning_rate, self.learning_rate)
            && within(hp.weight_decay, self.weight_decay)
            && within(hp.dropout, self.dropout)
            && self.activations.contains(&hp.activation)
    }
}

/// Settings shared by every network fit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainingConfig {
    /// Trailing share of the window used for validation.
    pub validation_fraction: f64,
    pub huber_delta: f64,
    /// Returns are multiplied by this before training.
    pub target_scale: f64,
    /// Months of predictor history fed to the recurrent network.
    pub seq_len: usize,
    pub ensemble_size: usize,
    /// Train every member from the same seed (testing aid).
    pub shared_member_seed: bool,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        TrainingConfig {
            validation_fraction: 0.2,
            huber_delta: 1.0,
            target_scale: 100.0,
            seq_len: 12,
            ensemble_size: 5,
            shared_member_seed: false,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::RngStream;

    #[test]
    fn ids_round_trip() {
        for k in ModelKind::ALL {
            assert_eq!(k.id().parse::<ModelKind>().unwrap(), k);
        }
        assert!("NN4".parse::<ModelKind>().is_err());
    }

    #[test]
    fn window_conventions() {
        assert_eq!(ModelSpec::standard(ModelKind::Ols1, 120).window, WindowSpec::Expanding);
        assert_eq!(ModelSpec::standard(ModelKind::Ols3, 120).window, WindowSpec::Expanding);
        for k in [ModelKind::Ols2, ModelKind::Ols4, ModelKind::Nn1, ModelKind::Lstm] {
            assert_eq!(ModelSpec::standard(k, 240).window, WindowSpec::Rolling { length_months: 240 });
        }
        assert_eq!(ModelSpec::standard(ModelKind::Ols2, 120).features, FeatureSet::DividendYield);
        assert_eq!(ModelSpec::standard(ModelKind::Nn2, 120).features, FeatureSet::All);
    }

    #[test]
    fn samples_stay_in_box() {
        let hb = HyperBox::default();
        let mut rng = RngStream::new(3, "box").rng();
        let mut seen = std::collections::HashSet::new();
        for _ in 0..500 {
            let hp = hb.sample(&mut rng);
            assert!(hb.contains(&hp));
            hp.validate().unwrap();
            seen.insert(hp.activation.to_string());
        }
        assert_eq!(seen.len(), 2);
    }
}
