//! Historical-mean and least-squares forecasters.

use log::warn;

use super::spec::{FeatureSet, ModelKind, ModelSpec};
use super::trained::{feature_columns, Fit, TrainedModel, VARIANCE_FLOOR};
use crate::data::{Panel, WindowSpec};
use crate::error::{Error, Result};
use crate::numerics::linalg::least_squares;

/// Constant mean and variance (denominator n − 1) of the window's returns.
pub fn fit_eh(window: &Panel) -> Result<TrainedModel> {
    fit_eh_with(window, ModelSpec::standard(ModelKind::Eh, 120).window)
}

pub(crate) fn fit_eh_with(window: &Panel, spec_window: WindowSpec) -> Result<TrainedModel> {
    let r = window.excess_return();
    let n = r.len();
    if n < 2 {
        return Err(Error::InsufficientData(format!("historical mean needs 2 returns, window has {n}")));
    }
    let mean = r.iter().sum::<f64>() / n as f64;
    let var = r.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64;
    if var < VARIANCE_FLOOR {
        warn!("EH window ending {:?} has variance {var:e}; clamped to {VARIANCE_FLOOR:e}", window.end());
    }
    let spec = ModelSpec {
        kind: ModelKind::Eh,
        window: spec_window,
        features: FeatureSet::All,
    };
    TrainedModel::assemble(spec, Fit::Constant { mean }, var, window, Vec::new(), None)
}

/// Least squares of `r_{s+1}` on `(1, x_s)` over consecutive window rows.
/// Residual variance is SSE / (m − p − 1).
pub fn fit_ols(window: &Panel, features: FeatureSet) -> Result<TrainedModel> {
    fit_ols_with(
        window,
        ModelSpec {
            kind: match features {
                FeatureSet::DividendYield => ModelKind::Ols1,
                FeatureSet::All => ModelKind::Ols3,
            },
            window: WindowSpec::Expanding,
            features,
        },
    )
}

pub(crate) fn fit_ols_with(window: &Panel, spec: ModelSpec) -> Result<TrainedModel> {
    let cols = feature_columns(window, spec.features)?;
    let p = cols.len() + 1;
    if window.len() <= p {
        return Err(Error::InsufficientData(format!(
            "regression on {} predictors needs more than {p} rows, window has {}",
            cols.len(),
            window.len()
        )));
    }
    let m = window.len() - 1;
    let mut design = Vec::with_capacity(m * p);
    for s in 0..m {
        let row = window.row(s);
        design.push(1.0);
        design.extend(cols.iter().map(|&j| row[j]));
    }
    let y = &window.excess_return()[1..];
    let ls = least_squares(&design, p, y)?;
    if ls.ridge_used {
        warn!(
            "{} design singular on window ending {:?}; ridge fallback applied",
            spec.kind,
            window.end()
        );
    }
    let sse: f64 = (0..m)
        .map(|s| {
            let fitted: f64 = design[s * p..(s + 1) * p].iter().zip(&ls.coef).map(|(a, b)| a * b).sum();
            (y[s] - fitted).powi(2)
        })
        .sum();
    let dof = m.saturating_sub(p).max(1);
    let fit = Fit::Linear {
        intercept: ls.coef[0],
        slopes: ls.coef[1..].to_vec(),
        ridge_used: ls.ridge_used,
    };
    TrainedModel::assemble(spec, fit, sse / dof as f64, window, cols, None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Month;
    use crate::numerics::{standard_normal, RngStream};

    fn panel(ret: Vec<f64>, cols: &[(&str, Vec<f64>)]) -> Panel {
        let n = ret.len();
        let start = Month::new(2000, 1).unwrap();
        let mut pred = Vec::with_capacity(n * cols.len());
        for i in 0..n {
            pred.extend(cols.iter().map(|c| c.1[i]));
        }
        Panel::new(
            (0..n as i32).map(|i| start.offset(i)).collect(),
            ret,
            vec![0.0; n],
            cols.iter().map(|c| c.0.to_string()).collect(),
            pred,
        )
        .unwrap()
    }

    #[test]
    fn two_point_mean_and_variance() {
        let p = panel(vec![0.01, 0.03], &[("dp", vec![1.0, 2.0])]);
        let m = fit_eh(&p).unwrap();
        assert!((m.predict(&p).unwrap().0 - 0.02).abs() < 1e-15);
        assert!((m.residual_variance - 2e-4).abs() < 1e-15);
    }

    #[test]
    fn constant_returns_hit_the_floor() {
        let p = panel(vec![0.01; 5], &[("dp", vec![1.0; 5])]);
        assert_eq!(fit_eh(&p).unwrap().residual_variance, VARIANCE_FLOOR);
        assert!(fit_eh(&panel(vec![0.01], &[("dp", vec![1.0])])).is_err());
    }

    #[test]
    fn eh_ignores_predictors() {
        let p = panel(vec![0.01, 0.02, -0.01], &[("dp", vec![1.0, 2.0, 3.0])]);
        let m = fit_eh(&p).unwrap();
        let q = panel(vec![0.5, 0.5, 0.5], &[("dp", vec![-9.0, 9.0, 100.0])]);
        assert_eq!(m.predict(&p).unwrap(), m.predict(&q).unwrap());
    }

    #[test]
    fn exact_linear_relation() {
        let x: Vec<f64> = (0..40).map(|i| ((i * 7) % 11) as f64 / 10.0).collect();
        let mut r = vec![0.0];
        r.extend(x[..39].iter().map(|v| 0.5 * v));
        let p = panel(r, &[("dp", x)]);
        let m = fit_ols(&p, FeatureSet::DividendYield).unwrap();
        let Fit::Linear { intercept, slopes, ridge_used } = &m.fit else {
            panic!("linear fit expected")
        };
        assert!(!ridge_used);
        assert!(intercept.abs() < 1e-10);
        assert!((slopes[0] - 0.5).abs() < 1e-10);
    }

    #[test]
    fn affine_prediction() {
        let p = panel(vec![0.0, 0.1, 0.2], &[("dp", vec![0.0, 0.0, 0.02])]);
        let mut m = fit_ols(&p, FeatureSet::DividendYield).unwrap();
        m.fit = Fit::Linear {
            intercept: 0.001,
            slopes: vec![0.5],
            ridge_used: false,
        };
        assert!((m.predict(&p).unwrap().0 - 0.011).abs() < 1e-15);
    }

    #[test]
    fn duplicate_column_triggers_ridge() {
        let x: Vec<f64> = (0..30).map(|i| (i as f64).sin()).collect();
        let r: Vec<f64> = (0..30).map(|i| 0.01 * (i as f64).cos()).collect();
        let p = panel(r, &[("dp", x.clone()), ("ep", x)]);
        let m = fit_ols(&p, FeatureSet::All).unwrap();
        let Fit::Linear { slopes, ridge_used, .. } = &m.fit else {
            panic!("linear fit expected")
        };
        assert!(ridge_used);
        assert!(slopes.iter().all(|b| b.is_finite()));
    }

    #[test]
    fn independent_noise_slope_within_three_standard_errors() {
        let n = 100_000;
        let mut rng = RngStream::new(11, "ols-null").rng();
        let x: Vec<f64> = (0..n).map(|_| standard_normal(&mut rng)).collect();
        let r: Vec<f64> = (0..n).map(|_| 0.04 * standard_normal(&mut rng)).collect();
        let p = panel(r, &[("dp", x.clone())]);
        let m = fit_ols(&p, FeatureSet::DividendYield).unwrap();
        let Fit::Linear { slopes, .. } = &m.fit else { panic!() };
        // se(β) = σ / sqrt(Σ (x − x̄)²) over the regressors x_0..x_{n−2}
        let xs = &x[..n - 1];
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        let sxx: f64 = xs.iter().map(|v| (v - mean).powi(2)).sum();
        let se = m.residual_variance.sqrt() / sxx.sqrt();
        assert!(slopes[0].abs() < 3.0 * se, "{} vs se {se}", slopes[0]);
    }

    #[test]
    fn too_few_rows() {
        let p = panel(vec![0.0, 0.1], &[("dp", vec![1.0, 2.0])]);
        assert!(matches!(fit_ols(&p, FeatureSet::DividendYield), Err(Error::InsufficientData(_))));
    }
}
