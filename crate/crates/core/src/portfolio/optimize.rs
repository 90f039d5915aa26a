//! Expected-utility maximization over a weight grid, holding one weight
//! until the end of the simulated horizon.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::utility::{ConstraintPreset, UtilitySpec, WeightConstraint};
use crate::data::Month;
use crate::dynamics::ScenarioSet;
use crate::error::{Error, Result};
use crate::numerics::RngStream;

/// Utility assigned to a path whose wealth hits zero.
pub const RUIN_UTILITY: f64 = -1e6;

/// Default grid spacing.
pub const GRID_STEP: f64 = 0.01;

/// Mean utility at grid weights `tick · step` for consecutive ticks.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UtilityCurve {
    pub step: f64,
    pub first_tick: i64,
    pub expected_utility: Vec<f64>,
    /// Paths ruined at each grid weight.
    pub ruined_paths: Vec<usize>,
    pub n_paths: usize,
}

fn tick_range(lower: f64, upper: f64, step: f64) -> Result<(i64, i64)> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::Parameter(format!("grid step {step} must be positive")));
    }
    let lo = (lower / step - 1e-9).ceil() as i64;
    let hi = (upper / step + 1e-9).floor() as i64;
    if lo > hi {
        return Err(Error::Parameter(format!("no grid point of step {step} in [{lower}, {upper}]")));
    }
    Ok((lo, hi))
}

impl UtilityCurve {
    pub fn weight(&self, i: usize) -> f64 {
        (self.first_tick + i as i64) as f64 * self.step
    }

    /// Best grid weight inside `constraint`: highest mean utility, ties to
    /// the smaller |ω|, then the smaller ω.
    pub fn best_within(&self, constraint: WeightConstraint) -> Result<(f64, f64)> {
        let (lo, hi) = tick_range(constraint.lower, constraint.upper, self.step)?;
        let last = self.first_tick + self.expected_utility.len() as i64 - 1;
        if lo < self.first_tick || hi > last {
            return Err(Error::Parameter(format!(
                "constraint [{}, {}] exceeds the evaluated grid",
                constraint.lower, constraint.upper
            )));
        }
        let mut best: Option<(i64, f64)> = None;
        let mut any_alive = false;
        for tick in lo..=hi {
            let i = (tick - self.first_tick) as usize;
            any_alive |= self.ruined_paths[i] < self.n_paths;
            let eu = self.expected_utility[i];
            let better = match best {
                None => true,
                Some((bt, bu)) => eu > bu || (eu == bu && (tick.abs(), tick) < (bt.abs(), bt)),
            };
            if better {
                best = Some((tick, eu));
            }
        }
        if !any_alive {
            return Err(Error::Optimization(format!(
                "every weight in [{}, {}] ruins every path",
                constraint.lower, constraint.upper
            )));
        }
        let (tick, eu) = best.expect("nonempty grid");
        Ok((tick as f64 * self.step, eu))
    }
}

/// Evaluates mean utility of end-of-horizon wealth for every grid weight in
/// `[lower, upper]`, each weight held for the whole horizon.
pub fn utility_curve(scenarios: &ScenarioSet, lower: f64, upper: f64, step: f64, utility: &UtilitySpec) -> Result<UtilityCurve> {
    utility.validate()?;
    let (lo, hi) = tick_range(lower, upper, step)?;
    let growth: Vec<f64> = scenarios.returns.iter().map(|r| r.exp_m1()).collect();
    let cash = scenarios.rf.iter().sum::<f64>().exp();
    let h = scenarios.horizon;
    let n = scenarios.n_paths;
    let evaluated: Vec<(f64, usize)> = (lo..=hi)
        .into_par_iter()
        .map(|tick| {
            let w = tick as f64 * step;
            let mut total = 0.0;
            let mut ruined = 0;
            for p in 0..n {
                let mut gross = cash;
                let mut alive = true;
                for g in &growth[p * h..(p + 1) * h] {
                    let f = 1.0 + w * g;
                    if !(f > 0.0) {
                        alive = false;
                        break;
                    }
                    gross *= f;
                }
                if alive && gross > 0.0 {
                    total += utility.eval(gross).max(RUIN_UTILITY);
                } else {
                    ruined += 1;
                    total += RUIN_UTILITY;
                }
            }
            (total / n as f64, ruined)
        })
        .collect();
    Ok(UtilityCurve {
        step,
        first_tick: lo,
        expected_utility: evaluated.iter().map(|e| e.0).collect(),
        ruined_paths: evaluated.iter().map(|e| e.1).collect(),
        n_paths: n,
    })
}

/// Optimum under one constraint preset.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PresetChoice {
    pub preset: ConstraintPreset,
    pub weight: f64,
    pub expected_utility: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AllocationDecision {
    /// Month at whose end the weight is chosen.
    pub date: Option<Month>,
    pub weight: f64,
    pub expected_utility: f64,
    pub constraint: WeightConstraint,
    pub scenario_stream: RngStream,
    /// Optimum under each preset on the same scenarios.
    pub presets: Vec<PresetChoice>,
}

impl AllocationDecision {
    pub fn preset(&self, preset: ConstraintPreset) -> Option<&PresetChoice> {
        self.presets.iter().find(|p| p.preset == preset)
    }
}

/// Weight range the curve is evaluated on: the constraint joined with the
/// widest preset, so every preset can be read off the same curve.
pub fn evaluation_hull(constraint: WeightConstraint) -> (f64, f64) {
    let wide = ConstraintPreset::Baseline.bounds();
    (constraint.lower.min(wide.lower), constraint.upper.max(wide.upper))
}

/// Reads the decision for `constraint` off an evaluated curve.
pub fn decide(curve: &UtilityCurve, constraint: WeightConstraint, stream: &RngStream) -> Result<AllocationDecision> {
    let (weight, expected_utility) = curve.best_within(constraint)?;
    let presets = ConstraintPreset::ALL
        .iter()
        .filter_map(|p| {
            curve.best_within(p.bounds()).ok().map(|(weight, expected_utility)| PresetChoice {
                preset: *p,
                weight,
                expected_utility,
            })
        })
        .collect();
    Ok(AllocationDecision {
        date: None,
        weight,
        expected_utility,
        constraint,
        scenario_stream: stream.clone(),
        presets,
    })
}

pub fn optimize_weight(
    scenarios: &ScenarioSet,
    constraint: WeightConstraint,
    utility: &UtilitySpec,
    step: f64,
) -> Result<AllocationDecision> {
    let (lower, upper) = evaluation_hull(constraint);
    let curve = utility_curve(scenarios, lower, upper, step, utility)?;
    decide(&curve, constraint, &scenarios.stream)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_point(up: f64, down: f64) -> ScenarioSet {
        ScenarioSet::from_returns(vec![vec![up], vec![down]], vec![0.0]).unwrap()
    }

    #[test]
    fn indifference_picks_cash() {
        let s = ScenarioSet::from_returns(vec![vec![0.0, 0.0]; 5], vec![0.003, 0.003]).unwrap();
        let d = optimize_weight(&s, ConstraintPreset::Baseline.bounds(), &UtilitySpec::default(), GRID_STEP).unwrap();
        assert_eq!(d.weight, 0.0);
    }

    #[test]
    fn sure_premium_goes_to_the_cap() {
        let s = ScenarioSet::from_returns(vec![vec![0.01, 0.02]; 3], vec![0.0, 0.0]).unwrap();
        for p in ConstraintPreset::ALL {
            let d = optimize_weight(&s, p.bounds(), &UtilitySpec::default(), GRID_STEP).unwrap();
            assert!((d.weight - p.bounds().upper).abs() < 1e-12);
        }
    }

    #[test]
    fn symmetric_two_point_matches_brute_force() {
        let s = two_point(0.05, -0.05);
        let u = UtilitySpec::default();
        let d = optimize_weight(&s, ConstraintPreset::Baseline.bounds(), &u, GRID_STEP).unwrap();
        // Dense scan of the exact two-outcome expectation.
        let mut best = (f64::NEG_INFINITY, 0.0);
        for i in 0..=300_000 {
            let w = -1.0 + i as f64 * 1e-5;
            let eu = 0.5 * (u.eval(1.0 + w * 0.05f64.exp_m1()) + u.eval(1.0 + w * (-0.05f64).exp_m1()));
            if eu > best.0 {
                best = (eu, w);
            }
        }
        assert!((d.weight - best.1).abs() <= GRID_STEP + 1e-12, "{} vs {}", d.weight, best.1);
    }

    #[test]
    fn nested_constraints_nest_utilities() {
        let s = two_point(0.08, -0.03);
        let d = optimize_weight(&s, ConstraintPreset::Baseline.bounds(), &UtilitySpec::default(), GRID_STEP).unwrap();
        let u: Vec<f64> = d.presets.iter().map(|p| p.expected_utility).collect();
        assert!(u[0] >= u[1] && u[1] >= u[2]);
    }

    #[test]
    fn universal_ruin_is_an_error() {
        // e^r − 1 ≈ −1, so every weight above 1 loses more than everything.
        let s = ScenarioSet::from_returns(vec![vec![-20.0]], vec![0.0]).unwrap();
        let r = optimize_weight(&s, WeightConstraint::new(1.01, 2.0).unwrap(), &UtilitySpec::default(), GRID_STEP);
        assert!(matches!(r, Err(Error::Optimization(_))));
    }
}
