use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::ar1::Ar1Params;
use crate::data::Panel;
use crate::error::{Error, Result};
use crate::models::TrainedModel;
use crate::numerics::linalg::psd_repair;
use crate::numerics::standard_normal;

/// Eigenvalue floor used when repairing the covariance.
pub const EIGEN_FLOOR: f64 = 1e-12;

/// Joint covariance of `(ε^r, ε^x)`, row-major, with a factor `L`
/// (`L L' = matrix`) for sampling.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualCov {
    pub dim: usize,
    /// Sample covariance before repair.
    pub sample: Vec<f64>,
    pub matrix: Vec<f64>,
    pub factor: Vec<f64>,
    pub min_eigenvalue: f64,
    pub observations: usize,
}

impl ResidualCov {
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.matrix[i * self.dim + j]
    }

    /// Covariance with a given matrix (repaired if needed), for experiments.
    pub fn from_matrix(dim: usize, values: &[f64]) -> Result<Self> {
        if values.len() != dim * dim || dim == 0 {
            return Err(Error::Shape(format!("{} values for a {dim}x{dim} covariance", values.len())));
        }
        let m = DMatrix::from_row_slice(dim, dim, values);
        Ok(Self::build(dim, values.to_vec(), &m, 0))
    }

    /// All-zero covariance: simulations become deterministic.
    pub fn zero(dim: usize) -> Self {
        ResidualCov {
            dim,
            sample: vec![0.0; dim * dim],
            matrix: vec![0.0; dim * dim],
            factor: vec![0.0; dim * dim],
            min_eigenvalue: 0.0,
            observations: 0,
        }
    }

    fn build(dim: usize, sample: Vec<f64>, m: &DMatrix<f64>, observations: usize) -> Self {
        let r = psd_repair(m, EIGEN_FLOOR);
        let row_major = |x: &DMatrix<f64>| (0..dim).flat_map(|i| (0..dim).map(move |j| (i, j))).map(|(i, j)| x[(i, j)]).collect();
        ResidualCov {
            dim,
            sample,
            matrix: row_major(&r.matrix),
            factor: row_major(&r.factor),
            min_eigenvalue: r.min_eigenvalue,
            observations,
        }
    }

    /// One draw `L z` with `z` standard normal, written to `out`.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R, z: &mut [f64], out: &mut [f64]) {
        for v in z.iter_mut() {
            *v = standard_normal(rng);
        }
        for (i, o) in out.iter_mut().enumerate() {
            let row = &self.factor[i * self.dim..(i + 1) * self.dim];
            *o = row.iter().zip(z.iter()).map(|(a, b)| a * b).sum();
        }
    }
}

/// Sample covariance (denominator m − 1) of aligned return residuals and
/// predictor residual rows, followed by an eigenvalue-floor repair.
pub fn estimate_residual_cov(return_resid: &[f64], predictor_resid: &[Vec<f64>]) -> Result<ResidualCov> {
    let m = return_resid.len();
    if predictor_resid.len() != m {
        return Err(Error::Shape(format!(
            "{m} return residuals but {} predictor residual rows",
            predictor_resid.len()
        )));
    }
    let k = predictor_resid.first().map_or(0, |r| r.len());
    if predictor_resid.iter().any(|r| r.len() != k) {
        return Err(Error::Shape("predictor residual rows differ in length".into()));
    }
    let dim = k + 1;
    if m < k + 2 {
        return Err(Error::InsufficientData(format!(
            "{m} residual observations for a {dim}-dimensional covariance"
        )));
    }
    let row = |t: usize, i: usize| if i == 0 { return_resid[t] } else { predictor_resid[t][i - 1] };
    let means: Vec<f64> = (0..dim).map(|i| (0..m).map(|t| row(t, i)).sum::<f64>() / m as f64).collect();
    let mut sample = vec![0.0; dim * dim];
    for i in 0..dim {
        for j in 0..=i {
            let c = (0..m).map(|t| (row(t, i) - means[i]) * (row(t, j) - means[j])).sum::<f64>() / (m - 1) as f64;
            sample[i * dim + j] = c;
            sample[j * dim + i] = c;
        }
    }
    let mat = DMatrix::from_row_slice(dim, dim, &sample);
    Ok(ResidualCov::build(dim, sample, &mat, m))
}

/// Forecaster residuals and AR(1) residuals on the window rows where both
/// exist.
pub fn joint_residuals(model: &TrainedModel, ar1: &Ar1Params, window: &Panel) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let r = model.fitted_residuals(window)?;
    let x = ar1.residuals(window);
    let mut ret = Vec::new();
    let mut pred = Vec::new();
    for s in 1..window.len() {
        if let Some(e) = r[s] {
            ret.push(e);
            pred.push(x[s - 1].clone());
        }
    }
    Ok((ret, pred))
}
