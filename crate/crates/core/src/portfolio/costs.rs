use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::accounting::risky_factor;
use crate::error::{Error, Result};

/// How last month's weight is carried forward before measuring a trade.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TurnoverConvention {
    /// `ω·e^{rf+r} / G`: the weight the position drifted to.
    #[default]
    Drifted,
    /// `ω·G`, the previous weight times the portfolio's gross return.
    Verbatim,
}

impl fmt::Display for TurnoverConvention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TurnoverConvention::Drifted => "drifted",
            TurnoverConvention::Verbatim => "verbatim",
        })
    }
}

impl FromStr for TurnoverConvention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "drifted" => Ok(TurnoverConvention::Drifted),
            "verbatim" => Ok(TurnoverConvention::Verbatim),
            other => Err(Error::Parameter(format!("unknown turnover convention `{other}` (drifted, verbatim)"))),
        }
    }
}

/// Weight held at the end of a month that started at `weight`.
pub fn carried_weight(weight: f64, r: f64, rf: f64, convention: TurnoverConvention) -> f64 {
    let rel = risky_factor(weight, r);
    match convention {
        TurnoverConvention::Drifted => {
            if rel > 0.0 {
                weight * r.exp() / rel
            } else {
                weight
            }
        }
        TurnoverConvention::Verbatim => weight * rel * rf.exp(),
    }
}

/// Absolute trade at the start of every month. The first month trades out
/// of an all-cash position.
pub fn trades(weights: &[f64], r: &[f64], rf: &[f64], convention: TurnoverConvention) -> Result<Vec<f64>> {
    if weights.len() != r.len() || r.len() != rf.len() {
        return Err(Error::Shape(format!(
            "{} weights, {} returns, {} risk-free yields",
            weights.len(),
            r.len(),
            rf.len()
        )));
    }
    let mut out = Vec::with_capacity(weights.len());
    for t in 0..weights.len() {
        let before = if t == 0 { 0.0 } else { carried_weight(weights[t - 1], r[t - 1], rf[t - 1], convention) };
        out.push((weights[t] - before).abs());
    }
    Ok(out)
}

/// Subtracts `τ·|trade|` from each month's log return.
pub fn apply_transaction_costs(
    returns: &[f64],
    weights: &[f64],
    r: &[f64],
    rf: &[f64],
    tau: f64,
    convention: TurnoverConvention,
) -> Result<Vec<f64>> {
    if !(tau >= 0.0 && tau.is_finite()) {
        return Err(Error::Parameter(format!("transaction cost {tau} must be nonnegative")));
    }
    if returns.len() != weights.len() {
        return Err(Error::Shape(format!("{} returns for {} weights", returns.len(), weights.len())));
    }
    let traded = trades(weights, r, rf, convention)?;
    Ok(returns.iter().zip(&traded).map(|(x, d)| x - tau * d).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_cost_is_identity() {
        let ret = [0.01, -0.02, 0.005];
        let w = [0.5, 1.2, -0.3];
        let r = [0.02, -0.01, 0.0];
        let out = apply_transaction_costs(&ret, &w, &r, &[0.001; 3], 0.0, TurnoverConvention::Drifted).unwrap();
        assert_eq!(out, ret);
    }

    #[test]
    fn flat_market_charges_only_the_first_trade() {
        let out = apply_transaction_costs(&[0.0; 4], &[0.7; 4], &[0.0; 4], &[0.0; 4], 0.001, TurnoverConvention::Drifted).unwrap();
        assert!((out[0] + 0.0007).abs() < 1e-15);
        assert_eq!(&out[1..], &[0.0; 3]);
    }

    #[test]
    fn jump_to_equity_costs_tau() {
        let out = apply_transaction_costs(&[0.01, 0.02], &[0.0, 1.0], &[0.0; 2], &[0.0; 2], 0.005, TurnoverConvention::Drifted).unwrap();
        assert_eq!(out[0], 0.01);
        assert!((out[1] - 0.015).abs() < 1e-15);
    }

    #[test]
    fn drift_matches_holding() {
        // Buy and hold at ω = 1 never trades after the first month.
        let r = [0.03, -0.02, 0.05];
        let t = trades(&[1.0; 3], &r, &[0.001; 3], TurnoverConvention::Drifted).unwrap();
        assert!(t[1] < 1e-15 && t[2] < 1e-15);
        // A 50/50 split after the risky leg doubles relative to cash.
        let w = carried_weight(0.5, 2f64.ln(), 0.0, TurnoverConvention::Drifted);
        assert!((w - 2.0 / 3.0).abs() < 1e-15);
        assert!(apply_transaction_costs(&[0.0], &[0.0], &[0.0], &[0.0], -0.1, TurnoverConvention::Drifted).is_err());
    }
}
