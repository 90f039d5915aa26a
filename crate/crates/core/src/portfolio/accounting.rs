use crate::error::{Error, Result};

/// Gross one-month factor `(1−ω)·e^{rf} + ω·e^{rf+r}`, evaluated as
/// `e^{rf}·(1 + ω·(e^r − 1))` so that `r = 0` gives exactly `e^{rf}`.
#[inline]
pub fn monthly_factor(weight: f64, r: f64, rf: f64) -> f64 {
    rf.exp() * risky_factor(weight, r)
}

/// `1 + ω·(e^r − 1)`: the portfolio's gross return relative to cash.
#[inline]
pub fn risky_factor(weight: f64, r: f64) -> f64 {
    1.0 + weight * r.exp_m1()
}

/// Product of monthly factors for a piecewise-constant weight path (one
/// weight per month). A nonpositive factor is ruin.
pub fn cumulative_return(weights: &[f64], r: &[f64], rf: &[f64]) -> Result<f64> {
    if weights.len() != r.len() || r.len() != rf.len() {
        return Err(Error::Shape(format!(
            "{} weights, {} returns, {} risk-free yields",
            weights.len(),
            r.len(),
            rf.len()
        )));
    }
    let mut gross = 1.0;
    for (h, ((w, r), rf)) in weights.iter().zip(r).zip(rf).enumerate() {
        let f = monthly_factor(*w, *r, *rf);
        if !(f > 0.0) {
            return Err(Error::Domain(format!("ruin: month {h} gross factor {f} with weight {w}")));
        }
        gross *= f;
    }
    Ok(gross)
}

/// Expands per-segment weights to months, each held for `interval` months.
pub fn segment_weights(segments: &[f64], interval: usize) -> Vec<f64> {
    segments.iter().flat_map(|w| std::iter::repeat_n(*w, interval)).collect()
}
