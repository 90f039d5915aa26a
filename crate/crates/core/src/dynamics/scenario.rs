use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ar1::Ar1Params;
use super::covariance::ResidualCov;
use crate::data::Panel;
use crate::error::{Error, Result};
use crate::models::TrainedModel;
use crate::numerics::RngStream;

/// Redraws allowed for a path that produced a non-finite value.
pub const MAX_RETRIES: usize = 3;

/// Simulated joint paths. Path `p`, month `h` lives at `p * horizon + h`;
/// predictor rows add a trailing `n_predictors` axis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSet {
    pub model: String,
    pub stream: RngStream,
    pub n_paths: usize,
    pub horizon: usize,
    pub n_predictors: usize,
    pub returns: Vec<f64>,
    pub predictors: Vec<f64>,
    /// Risk-free log yield per simulated month (common to all paths).
    pub rf: Vec<f64>,
}

impl ScenarioSet {
    /// Scenarios given directly as return paths with a flat risk-free rate.
    pub fn from_returns(paths: Vec<Vec<f64>>, rf: Vec<f64>) -> Result<Self> {
        let horizon = rf.len();
        if paths.is_empty() || horizon == 0 || paths.iter().any(|p| p.len() != horizon) {
            return Err(Error::Shape("scenario paths must be nonempty and match the horizon".into()));
        }
        Ok(ScenarioSet {
            model: "given".into(),
            stream: RngStream::new(0, "given"),
            n_paths: paths.len(),
            horizon,
            n_predictors: 0,
            returns: paths.concat(),
            predictors: Vec::new(),
            rf,
        })
    }

    pub fn path(&self, p: usize) -> &[f64] {
        &self.returns[p * self.horizon..(p + 1) * self.horizon]
    }
}

/// Monte Carlo paths over `horizon` months from the end of `history`.
///
/// Each month draws `(ε^r, ε^x) ~ N(0, cov)`, sets
/// `r = model mean given the simulated history + ε^r` and
/// `x = α + β x_prev + ε^x`. The risk-free yield is held at its last
/// observed value. Path `p` uses substream `p`, so results do not depend on
/// how paths are scheduled across threads.
pub fn simulate_paths(
    model: &TrainedModel,
    ar1: &Ar1Params,
    cov: &ResidualCov,
    history: &Panel,
    horizon: usize,
    n_paths: usize,
    stream: &RngStream,
) -> Result<ScenarioSet> {
    if horizon == 0 || n_paths == 0 {
        return Err(Error::Parameter("horizon and path count must be at least 1".into()));
    }
    let k = ar1.dim();
    if cov.dim != k + 1 {
        return Err(Error::Shape(format!("covariance is {0}x{0}, expected {1}x{1}", cov.dim, k + 1)));
    }
    if history.predictor_names() != model.panel_predictors.as_slice() || history.predictor_names() != ar1.names.as_slice() {
        return Err(Error::Schema("history, model and AR(1) disagree on the predictor layout".into()));
    }
    let keep = model.required_rows().max(1);
    if history.len() < keep {
        return Err(Error::WindowUnderflow {
            end: history.end().map(|m| m.to_string()).unwrap_or_default(),
            needed: keep,
            available: history.len(),
        });
    }
    let seed_rows: Vec<f64> = (history.len() - keep..history.len())
        .flat_map(|i| history.row(i).iter().copied())
        .collect();
    let rf = *history.rf_yield().last().expect("nonempty history");

    let paths: Vec<(Vec<f64>, Vec<f64>)> = (0..n_paths)
        .into_par_iter()
        .map(|p| {
            let mut rng = stream.substream(p as u64);
            for _ in 0..=MAX_RETRIES {
                if let Some(path) = one_path(model, ar1, cov, &seed_rows, keep, horizon, &mut rng)? {
                    return Ok(path);
                }
            }
            Err(Error::NonFinite(format!("path {p} non-finite after {MAX_RETRIES} redraws")))
        })
        .collect::<Result<_>>()?;

    let mut returns = Vec::with_capacity(n_paths * horizon);
    let mut predictors = Vec::with_capacity(n_paths * horizon * k);
    for (r, x) in paths {
        returns.extend(r);
        predictors.extend(x);
    }
    Ok(ScenarioSet {
        model: model.spec.kind.to_string(),
        stream: stream.clone(),
        n_paths,
        horizon,
        n_predictors: k,
        returns,
        predictors,
        rf: vec![rf; horizon],
    })
}

type Path = (Vec<f64>, Vec<f64>);

fn one_path<R: rand::Rng>(
    model: &TrainedModel,
    ar1: &Ar1Params,
    cov: &ResidualCov,
    seed_rows: &[f64],
    keep: usize,
    horizon: usize,
    rng: &mut R,
) -> Result<Option<Path>> {
    let k = ar1.dim();
    // Sliding buffer of the last `keep` predictor rows, then simulated rows.
    let mut rows = seed_rows.to_vec();
    rows.reserve(horizon * k);
    let mut z = vec![0.0; k + 1];
    let mut eps = vec![0.0; k + 1];
    let mut returns = Vec::with_capacity(horizon);
    let mut next = vec![0.0; k];
    for h in 0..horizon {
        let recent: Vec<&[f64]> = (h..h + keep).map(|i| &rows[i * k..(i + 1) * k]).collect();
        let mean = model.mean_from_rows(&recent)?;
        cov.draw(rng, &mut z, &mut eps);
        let r = mean + eps[0];
        ar1.step_mean(recent[keep - 1], &mut next);
        for (x, e) in next.iter_mut().zip(&eps[1..]) {
            *x += e;
        }
        if !r.is_finite() || next.iter().any(|v| !v.is_finite()) {
            return Ok(None);
        }
        returns.push(r);
        rows.extend_from_slice(&next);
    }
    Ok(Some((returns, rows[keep * k..].to_vec())))
}
