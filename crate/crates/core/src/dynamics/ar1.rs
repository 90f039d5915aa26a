use log::warn;
use serde::{Deserialize, Serialize};

use crate::data::Panel;
use crate::error::{Error, Result};

/// Per-predictor `x_t = α + β x_{t−1} + ε_t`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ar1Params {
    pub names: Vec<String>,
    pub intercept: Vec<f64>,
    pub slope: Vec<f64>,
}

impl Ar1Params {
    pub fn dim(&self) -> usize {
        self.slope.len()
    }

    /// Conditional mean of the next row given `prev`.
    pub fn step_mean(&self, prev: &[f64], out: &mut [f64]) {
        for (((o, a), b), x) in out.iter_mut().zip(&self.intercept).zip(&self.slope).zip(prev) {
            *o = a + b * x;
        }
    }

    /// Residual rows aligned with window rows `1..n`.
    pub fn residuals(&self, window: &Panel) -> Vec<Vec<f64>> {
        let k = self.dim();
        (1..window.len())
            .map(|t| {
                let mut mean = vec![0.0; k];
                self.step_mean(window.row(t - 1), &mut mean);
                window.row(t).iter().zip(&mean).map(|(x, m)| x - m).collect()
            })
            .collect()
    }
}

/// OLS of each predictor on a constant and its own lag. A series whose
/// lagged values are constant gets slope 0 and intercept equal to its mean.
pub fn fit_ar1(window: &Panel) -> Result<Ar1Params> {
    let n = window.len();
    if n < 3 {
        return Err(Error::InsufficientData(format!("AR(1) needs 3 observations, window has {n}")));
    }
    let k = window.n_predictors();
    let m = (n - 1) as f64;
    let mut intercept = Vec::with_capacity(k);
    let mut slope = Vec::with_capacity(k);
    for j in 0..k {
        let col = window.column(j);
        let (lag, cur) = (&col[..n - 1], &col[1..]);
        let mx = lag.iter().sum::<f64>() / m;
        let my = cur.iter().sum::<f64>() / m;
        let sxx: f64 = lag.iter().map(|x| (x - mx) * (x - mx)).sum();
        let sxy: f64 = lag.iter().zip(cur).map(|(x, y)| (x - mx) * (y - my)).sum();
        let sd = (sxx / m).sqrt();
        let name = &window.predictor_names()[j];
        if sd <= 1e-12 * mx.abs().max(1.0) {
            warn!("predictor `{name}` is constant over the window; AR(1) slope set to 0");
            let mean = col.iter().sum::<f64>() / n as f64;
            intercept.push(mean);
            slope.push(0.0);
            continue;
        }
        let b = sxy / sxx;
        if b.abs() > 1.0 {
            warn!("predictor `{name}` has explosive AR(1) slope {b:.4}");
        }
        intercept.push(my - b * mx);
        slope.push(b);
    }
    Ok(Ar1Params {
        names: window.predictor_names().to_vec(),
        intercept,
        slope,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Month;
    use crate::numerics::{standard_normal, RngStream};

    pub(crate) fn one_column(x: Vec<f64>) -> Panel {
        let n = x.len();
        let start = Month::new(1990, 1).unwrap();
        Panel::new(
            (0..n as i32).map(|i| start.offset(i)).collect(),
            vec![0.0; n],
            vec![0.0; n],
            vec!["dp".into()],
            x,
        )
        .unwrap()
    }

    #[test]
    fn noiseless_recursion() {
        let mut x = vec![1.0];
        for _ in 0..50 {
            x.push(0.9 * x.last().unwrap());
        }
        let a = fit_ar1(&one_column(x)).unwrap();
        assert!((a.slope[0] - 0.9).abs() < 1e-10);
        assert!(a.intercept[0].abs() < 1e-10);
    }

    #[test]
    fn white_noise_slope_near_zero() {
        let n = 100_000;
        let mut rng = RngStream::new(8, "ar1").rng();
        let a = fit_ar1(&one_column((0..n).map(|_| standard_normal(&mut rng)).collect())).unwrap();
        assert!(a.slope[0].abs() < 3.0 / (n as f64).sqrt(), "{}", a.slope[0]);
    }

    #[test]
    fn constant_series() {
        let a = fit_ar1(&one_column(vec![0.25; 10])).unwrap();
        assert_eq!((a.intercept[0], a.slope[0]), (0.25, 0.0));
        assert!(fit_ar1(&one_column(vec![1.0, 2.0])).is_err());
    }
}
