//! Quick oracle checks runnable from the command line.

use crate::data::Month;
use crate::error::Result;
use crate::metrics::{cer, clark_west, max_drawdown, mspe, r2_oos, sharpe_ratio, turnover};
use crate::models::gradsuite::gradient_suite;
use crate::models::tasks::linear_collapse;
use crate::models::{ForecastRecord, HyperParams};
use crate::numerics::Activation;
use crate::portfolio::{
    cumulative_return, optimize_weight, power_utility, ConstraintPreset, TurnoverConvention, UtilitySpec, GRID_STEP,
};
use crate::dynamics::ScenarioSet;

#[derive(Clone, Debug)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

fn check(name: &'static str, f: impl FnOnce() -> Result<(bool, String)>) -> Check {
    match f() {
        Ok((passed, detail)) => Check { name, passed, detail },
        Err(e) => Check {
            name,
            passed: false,
            detail: e.to_string(),
        },
    }
}

fn record(realized: f64, predicted: f64, benchmark: f64) -> ForecastRecord {
    ForecastRecord {
        date: Month::new(2000, 1).expect("valid"),
        model: "M".into(),
        predicted,
        residual_variance: 1e-3,
        realized,
        benchmark,
    }
}

/// Runs every check; each returns pass/fail with a one-line detail.
pub fn run_all() -> Vec<Check> {
    vec![
        check("power utility", || {
            let u = power_utility(1.1, 4.0)?;
            Ok((close(power_utility(1.0, 4.0)?, -1.0 / 3.0, 1e-15) && close(u, -1.0 / (3.0 * 1.331), 1e-15), format!("U(1.1) = {u}")))
        }),
        check("cumulative return", || {
            let r = [0.02, -0.01];
            let rf = [0.001, 0.002];
            let cash = cumulative_return(&[0.0; 2], &r, &rf)?;
            Ok((close(cash, 0.003f64.exp(), 1e-15), format!("all-cash gross {cash}")))
        }),
        check("two-point optimizer", || {
            let s = ScenarioSet::from_returns(vec![vec![0.05], vec![-0.05]], vec![0.0])?;
            let u = UtilitySpec::default();
            let d = optimize_weight(&s, ConstraintPreset::Baseline.bounds(), &u, GRID_STEP)?;
            let mut best = (f64::NEG_INFINITY, 0.0);
            for i in 0..=30_000 {
                let w = -1.0 + i as f64 * 1e-4;
                let eu = 0.5 * (u.eval(1.0 + w * 0.05f64.exp_m1()) + u.eval(1.0 + w * (-0.05f64).exp_m1()));
                if eu > best.0 {
                    best = (eu, w);
                }
            }
            Ok((close(d.weight, best.1, GRID_STEP + 1e-12), format!("grid {} vs scan {:.4}", d.weight, best.1)))
        }),
        check("constant CER", || {
            let c = cer(&[1.03; 5], &UtilitySpec::default(), 6)?;
            Ok((close(c, 100.0 * (1.03f64.powi(2) - 1.0), 1e-10), format!("{c:.6}%")))
        }),
        check("Sharpe ratio", || {
            let s = sharpe_ratio(&[0.01, 0.03])?;
            Ok((close(s, 2f64.sqrt(), 1e-12), format!("{s:.6}")))
        }),
        check("max drawdown", || {
            let d = max_drawdown(&[0.10, -0.05, -0.05, 0.20]);
            Ok((close(d, 10.0, 1e-10), format!("{d:.6}%")))
        }),
        check("turnover", || {
            let flat = [0.0; 4];
            let t = turnover(&[0.0, 1.0, 0.0, 1.0], &flat, &flat, TurnoverConvention::Drifted)?;
            Ok((close(t, 100.0, 1e-12), format!("{t}%")))
        }),
        check("MSPE and R2oos", || {
            let recs = [record(0.01, 0.0, 0.002), record(-0.01, 0.0, 0.002)];
            let m = mspe(&recs)?;
            let r2 = r2_oos(&recs)?;
            // benchmark SSE: 0.008² + 0.012² = 2.08e-4
            Ok((close(m, 1e-4, 1e-18) && close(r2, 1.0 - 2e-4 / 2.08e-4, 1e-12), format!("mspe {m:e}, r2 {r2:.6}")))
        }),
        check("Clark-West", || {
            let recs: Vec<ForecastRecord> = (0..5)
                .map(|i| {
                    let x = i as f64;
                    record(0.01 * (x - 2.0), 0.004 * (x - 2.0), 0.001)
                })
                .collect();
            let t = clark_west(&recs, 0, 5)?;
            let f: Vec<f64> = recs
                .iter()
                .map(|r| (r.realized - r.benchmark).powi(2) - (r.realized - r.predicted).powi(2) + (r.benchmark - r.predicted).powi(2))
                .collect();
            let mean = f.iter().sum::<f64>() / 5.0;
            let var = f.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / 5.0;
            let stat = mean / (var / 5.0).sqrt();
            Ok((close(t.statistic, stat, 1e-10), format!("statistic {:.6}, p {:.4}", t.statistic, t.p_value)))
        }),
        check("gradients", || {
            let reports = gradient_suite(3)?;
            let worst = reports.iter().map(|r| r.max_rel_error).fold(0.0, f64::max);
            Ok((reports.iter().all(|r| r.passed()), format!("max relative error {worst:.2e} over {} cases", reports.len())))
        }),
        check("linear collapse", || {
            let hp = HyperParams {
                learning_rate: 0.01,
                activation: Activation::Identity,
                ..HyperParams::default()
            };
            let c = linear_collapse(0, &hp)?;
            Ok((c.max_abs_gap < 1e-8, format!("max gap {:.2e} after {} epochs", c.max_abs_gap, c.epochs_run)))
        }),
    ]
}
