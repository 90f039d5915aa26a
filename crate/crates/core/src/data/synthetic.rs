//! Deterministic synthetic panels with the layout of the monthly predictor
//! data, for demos, smoke tests and the sample configuration.

use super::{Month, Panel, DEFAULT_PREDICTORS};
use crate::numerics::{standard_normal, RngStream};

/// `(long-run mean, AR(1) slope, innovation sd)` per default predictor.
const PREDICTOR_LAWS: [(f64, f64, f64); 12] = [
    (-3.5, 0.99, 0.045),    // dp
    (-2.8, 0.98, 0.06),     // ep
    (-0.7, 0.97, 0.05),     // de
    (0.55, 0.985, 0.025),   // bm
    (0.01, 0.95, 0.004),    // ntis
    (0.045, 0.99, 0.003),   // tbl
    (0.017, 0.96, 0.003),   // tms
    (0.01, 0.97, 0.0012),   // dfy
    (0.0, 0.0, 0.013),      // dfr
    (0.0, 0.9, 0.0003),     // csp
    (0.003, 0.6, 0.003),    // infl
    (0.0025, 0.6, 0.0015),  // svar
];

/// Monthly panel from `start` to `end` inclusive with mild, partly
/// nonlinear return predictability from the dividend yield and variance.
pub fn synthetic_panel(seed: u64, start: Month, end: Month) -> Panel {
    let n = (end.since(start) + 1).max(0) as usize;
    let mut rng = RngStream::new(seed, "synthetic-panel").rng();
    let k = DEFAULT_PREDICTORS.len();
    let mut x: Vec<f64> = PREDICTOR_LAWS.iter().map(|l| l.0).collect();
    let mut dates = Vec::with_capacity(n);
    let mut ret = Vec::with_capacity(n);
    let mut rf = Vec::with_capacity(n);
    let mut pred = Vec::with_capacity(n * k);
    for t in 0..n {
        let prev = x.clone();
        let shock = standard_normal(&mut rng);
        for (j, (mean, phi, sd)) in PREDICTOR_LAWS.iter().enumerate() {
            let mut e = standard_normal(&mut rng);
            if j == 0 {
                // Dividend-yield shocks are negatively correlated with returns.
                e = -0.9 * shock + (1.0f64 - 0.81).sqrt() * e;
            }
            x[j] = mean + phi * (prev[j] - mean) + sd * e;
        }
        x[11] = x[11].abs().max(1e-5);
        let dp_gap = (prev[0] - PREDICTOR_LAWS[0].0) / 0.3;
        let var_gap = (prev[11] - PREDICTOR_LAWS[11].0) / 0.002;
        let mean_ret = 0.004 + 0.006 * dp_gap.tanh() - 0.004 * var_gap.tanh();
        dates.push(start.offset(t as i32));
        rf.push((prev[5].max(0.0)) / 12.0);
        ret.push(mean_ret + 0.042 * shock);
        pred.extend_from_slice(&x);
    }
    Panel::new(
        dates,
        ret,
        rf,
        DEFAULT_PREDICTORS.iter().map(|s| s.to_string()).collect(),
        pred,
    )
    .expect("synthetic panel is well-formed")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_sample_shape() {
        let p = synthetic_panel(1, Month::new(1945, 1).unwrap(), Month::new(2018, 12).unwrap());
        assert_eq!(p.len(), 888);
        assert_eq!(p.n_predictors(), 12);
        assert_eq!(p, synthetic_panel(1, p.start().unwrap(), p.end().unwrap()));
        let mean = p.excess_return().iter().sum::<f64>() / 888.0;
        assert!(mean.abs() < 0.02);
    }
}
