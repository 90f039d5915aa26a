//! Forecasters: historical mean, least squares, feedforward and recurrent
//! networks, with training, random search and ensembling.

pub mod ensemble;
pub mod gradsuite;
pub mod linear;
pub mod mlp;
pub mod network;
pub mod recurrent;
pub mod spec;
pub mod tasks;
pub mod train;
pub mod trained;

pub use ensemble::{evaluate_candidates, fit_ensemble, fit_model, network_inputs, random_search, NetworkInputs, SearchOutcome};
pub use linear::{fit_eh, fit_ols};
pub use network::{Architecture, Dataset};
pub use recurrent::{lstm_cell, CellKind, RecurrentLayer};
pub use spec::{FeatureSet, HyperBox, HyperParams, ModelKind, ModelSpec, TrainingConfig};
pub use train::{temporal_split, train_dataset, TrainOutcome};
pub use trained::{feature_columns, Fit, ForecastRecord, TrainedModel, VARIANCE_FLOOR};
