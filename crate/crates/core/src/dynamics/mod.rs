//! Predictor dynamics and joint return/predictor scenario generation.

mod ar1;
mod covariance;
mod scenario;

pub use ar1::{fit_ar1, Ar1Params};
pub use covariance::{estimate_residual_cov, joint_residuals, ResidualCov, EIGEN_FLOOR};
pub use scenario::{simulate_paths, ScenarioSet, MAX_RETRIES};

use crate::data::Panel;
use crate::error::Result;
use crate::models::TrainedModel;

/// AR(1) laws and joint residual covariance for `model` on its window.
pub fn fit_dynamics(model: &TrainedModel, window: &Panel) -> Result<(Ar1Params, ResidualCov)> {
    let ar1 = fit_ar1(window)?;
    let (r, x) = joint_residuals(model, &ar1, window)?;
    let cov = estimate_residual_cov(&r, &x)?;
    Ok((ar1, cov))
}
