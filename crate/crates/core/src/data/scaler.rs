use serde::{Deserialize, Serialize};

use super::Panel;

/// Per-feature z-score parameters estimated on a training window.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureScaler {
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
}

impl FeatureScaler {
    /// Fits on the window's predictors. A feature with (numerically) zero
    /// population standard deviation keeps scale 1 and is only centered.
    pub fn fit(window: &Panel) -> Self {
        let n = window.len().max(1) as f64;
        let k = window.n_predictors();
        let mut mean = vec![0.0; k];
        for i in 0..window.len() {
            for (m, v) in mean.iter_mut().zip(window.row(i)) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = vec![0.0; k];
        for i in 0..window.len() {
            for ((s, v), m) in var.iter_mut().zip(window.row(i)).zip(&mean) {
                *s += (v - m) * (v - m);
            }
        }
        let scale = var
            .iter()
            .zip(&mean)
            .map(|(s, m)| {
                let sd = (s / n).sqrt();
                if sd > 1e-12 * m.abs().max(1.0) {
                    sd
                } else {
                    1.0
                }
            })
            .collect();
        FeatureScaler { mean, scale }
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn apply(&self, row: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; row.len()];
        self.apply_into(row, &mut out);
        out
    }

    pub fn apply_into(&self, row: &[f64], out: &mut [f64]) {
        for (((o, v), m), s) in out.iter_mut().zip(row).zip(&self.mean).zip(&self.scale) {
            *o = (v - m) / s;
        }
    }

    /// Scales every row of `panel`, row-major.
    pub fn apply_panel(&self, panel: &Panel) -> Vec<f64> {
        let k = panel.n_predictors();
        let mut out = vec![0.0; panel.len() * k];
        for i in 0..panel.len() {
            self.apply_into(panel.row(i), &mut out[i * k..(i + 1) * k]);
        }
        out
    }
}
