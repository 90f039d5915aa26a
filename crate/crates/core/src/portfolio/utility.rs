use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Power utility `R^{1−γ} / (1−γ)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct UtilitySpec {
    pub gamma: f64,
}

impl UtilitySpec {
    pub fn new(gamma: f64) -> Result<Self> {
        let u = UtilitySpec { gamma };
        u.validate()?;
        Ok(u)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0 && self.gamma.is_finite()) || self.gamma == 1.0 {
            return Err(Error::Parameter(format!("risk aversion {} must be positive and not 1", self.gamma)));
        }
        Ok(())
    }

    #[inline]
    pub fn eval(&self, gross: f64) -> f64 {
        gross.powf(1.0 - self.gamma) / (1.0 - self.gamma)
    }
}

impl Default for UtilitySpec {
    fn default() -> Self {
        UtilitySpec { gamma: 4.0 }
    }
}

pub fn power_utility(gross: f64, gamma: f64) -> Result<f64> {
    let u = UtilitySpec::new(gamma)?;
    if !(gross > 0.0) {
        return Err(Error::Domain(format!("utility of nonpositive gross return {gross}")));
    }
    Ok(u.eval(gross))
}

/// Bounds on the risky weight.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightConstraint {
    pub lower: f64,
    pub upper: f64,
}

impl WeightConstraint {
    pub fn new(lower: f64, upper: f64) -> Result<Self> {
        if !(lower < upper) || !lower.is_finite() || !upper.is_finite() {
            return Err(Error::Parameter(format!("weight bounds [{lower}, {upper}] are not an interval")));
        }
        Ok(WeightConstraint { lower, upper })
    }

    pub fn contains(&self, w: f64) -> bool {
        self.lower <= w && w <= self.upper
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConstraintPreset {
    /// [−1, 2]
    Baseline,
    /// [−1, 1]
    NoBorrow,
    /// [0, 1]
    LongOnly,
}

impl ConstraintPreset {
    pub const ALL: [ConstraintPreset; 3] = [ConstraintPreset::Baseline, ConstraintPreset::NoBorrow, ConstraintPreset::LongOnly];

    pub fn bounds(self) -> WeightConstraint {
        let (lower, upper) = match self {
            ConstraintPreset::Baseline => (-1.0, 2.0),
            ConstraintPreset::NoBorrow => (-1.0, 1.0),
            ConstraintPreset::LongOnly => (0.0, 1.0),
        };
        WeightConstraint { lower, upper }
    }

    pub fn name(self) -> &'static str {
        match self {
            ConstraintPreset::Baseline => "baseline",
            ConstraintPreset::NoBorrow => "no-borrow",
            ConstraintPreset::LongOnly => "long-only",
        }
    }
}

impl fmt::Display for ConstraintPreset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ConstraintPreset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ConstraintPreset::ALL
            .into_iter()
            .find(|p| p.name() == s.trim())
            .ok_or_else(|| Error::Parameter(format!("unknown constraint preset `{s}` (baseline, no-borrow, long-only)")))
    }
}

/// Investment horizon and rebalancing interval, in months.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RebalanceSchedule {
    pub horizon: usize,
    pub interval: usize,
}

impl RebalanceSchedule {
    pub const QUARTERLY: RebalanceSchedule = RebalanceSchedule { horizon: 6, interval: 3 };
    pub const ANNUAL: RebalanceSchedule = RebalanceSchedule { horizon: 24, interval: 12 };

    pub fn new(horizon: usize, interval: usize) -> Result<Self> {
        let s = RebalanceSchedule { horizon, interval };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.interval == 0 || self.horizon == 0 || !self.horizon.is_multiple_of(self.interval) {
            return Err(Error::Parameter(format!(
                "rebalance interval {} must divide horizon {}",
                self.interval, self.horizon
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn utility_values() {
        assert!((power_utility(1.0, 4.0).unwrap() + 1.0 / 3.0).abs() < 1e-15);
        // 1.1^{-3} / (-3) = -0.25043826...
        let expected = -1.0 / (3.0 * 1.331);
        assert!((power_utility(1.1, 4.0).unwrap() - expected).abs() < 1e-15);
        assert!(power_utility(1.2, 4.0).unwrap() > power_utility(1.1, 4.0).unwrap());
        assert!(matches!(power_utility(0.0, 4.0), Err(Error::Domain(_))));
        assert!(power_utility(1.0, 1.0).is_err());
    }

    #[test]
    fn presets() {
        assert_eq!("no-borrow".parse::<ConstraintPreset>().unwrap().bounds(), WeightConstraint { lower: -1.0, upper: 1.0 });
        assert!(WeightConstraint::new(1.0, 1.0).is_err());
        assert!(RebalanceSchedule::new(6, 4).is_err());
        RebalanceSchedule::ANNUAL.validate().unwrap();
    }
}
