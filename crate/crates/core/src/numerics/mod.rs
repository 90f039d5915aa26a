//! Numerical substrate for network training: dense parameter tensors,
//! activations, Huber loss, dropout, Adam with decoupled weight decay,
//! deterministic random streams and finite-difference gradient checks.

mod activation;
mod adam;
mod dropout;
mod gradcheck;
pub mod linalg;
mod loss;
mod params;
mod rng;

pub use activation::{sigmoid, Activation};
pub use adam::{adam_step, AdamState};
pub use dropout::{check_rate, dropout_mask, Mode};
pub use gradcheck::grad_check;
pub use loss::{huber_loss, Huber};
pub use params::{ParameterSet, Tensor};
pub use rng::{standard_normal, uniform, RngStream};
