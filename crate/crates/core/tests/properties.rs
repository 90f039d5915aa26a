use deepfolio::data::Month;
use deepfolio::dynamics::ScenarioSet;
use deepfolio::metrics::{benchmark_mspe, cer, clark_west, max_drawdown, mspe, r2_oos};
use deepfolio::models::ForecastRecord;
use deepfolio::portfolio::{
    apply_transaction_costs, cumulative_return, monthly_factor, optimize_weight, segment_weights, trades, ConstraintPreset,
    TurnoverConvention, UtilitySpec, WeightConstraint,
};
use proptest::prelude::*;

fn returns(len: std::ops::Range<usize>) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-0.15f64..0.15, len)
}

fn scenario_set() -> impl Strategy<Value = ScenarioSet> {
    (1usize..4, 2usize..12).prop_flat_map(|(horizon, n)| {
        (prop::collection::vec(returns(horizon..horizon + 1), n), prop::collection::vec(0.0f64..0.005, horizon))
            .prop_map(|(paths, rf)| ScenarioSet::from_returns(paths, rf).unwrap())
    })
}

fn records() -> impl Strategy<Value = Vec<ForecastRecord>> {
    prop::collection::vec((-0.1f64..0.1, -0.02f64..0.02, -0.01f64..0.01), 12..40).prop_map(|v| {
        v.into_iter()
            .map(|(realized, predicted, benchmark)| ForecastRecord {
                date: Month::new(2000, 1).unwrap(),
                model: "M".into(),
                predicted,
                residual_variance: 1e-3,
                realized,
                benchmark,
            })
            .collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn wider_constraints_never_lose_utility(set in scenario_set(), gamma in 1.5f64..10.0) {
        let u = UtilitySpec::new(gamma).unwrap();
        let d = optimize_weight(&set, ConstraintPreset::Baseline.bounds(), &u, 0.01).unwrap();
        let eu = |p: ConstraintPreset| d.preset(p).unwrap().expected_utility;
        prop_assert!(eu(ConstraintPreset::Baseline) >= eu(ConstraintPreset::NoBorrow));
        prop_assert!(eu(ConstraintPreset::NoBorrow) >= eu(ConstraintPreset::LongOnly));
        for p in &d.presets {
            prop_assert!(p.preset.bounds().contains(p.weight));
        }
    }

    #[test]
    fn custom_bounds_hold(set in scenario_set(), lo in -1.0f64..0.5, width in 0.0f64..1.5) {
        let c = WeightConstraint::new(lo, lo + width).unwrap();
        if let Ok(d) = optimize_weight(&set, c, &UtilitySpec::default(), 0.01) {
            prop_assert!(c.lower - 1e-12 <= d.weight && d.weight <= c.upper + 1e-12);
        }
    }

    #[test]
    fn finer_grids_stay_close(set in scenario_set()) {
        let u = UtilitySpec::default();
        let c = ConstraintPreset::Baseline.bounds();
        let coarse = optimize_weight(&set, c, &u, 0.01).unwrap();
        let fine = optimize_weight(&set, c, &u, 0.005).unwrap();
        prop_assert!(fine.expected_utility >= coarse.expected_utility - 1e-15);
        prop_assert!((fine.weight - coarse.weight).abs() <= 0.015 + 1e-12);
    }

    #[test]
    fn costs_lower_returns_monotonically(w in prop::collection::vec(-1.0f64..2.0, 2..24), seed in returns(24..25), t1 in 0.0f64..0.01, dt in 0.0f64..0.01) {
        let n = w.len();
        let r = &seed[..n];
        let rf = vec![0.002; n];
        let gross: Vec<f64> = (0..n).map(|t| monthly_factor(w[t], r[t], rf[t]).ln()).collect();
        let low = apply_transaction_costs(&gross, &w, r, &rf, t1, TurnoverConvention::Drifted).unwrap();
        let high = apply_transaction_costs(&gross, &w, r, &rf, t1 + dt, TurnoverConvention::Drifted).unwrap();
        for t in 0..n {
            prop_assert!(high[t] <= low[t] && low[t] <= gross[t]);
        }
        let tr = trades(&w, r, &rf, TurnoverConvention::Drifted).unwrap();
        prop_assert!(tr.iter().all(|x| *x >= 0.0));
        prop_assert!((tr[0] - w[0].abs()).abs() < 1e-15);
    }

    #[test]
    fn cumulative_return_splits_at_any_month(seg in prop::collection::vec(-1.0f64..2.0, 1..6), r in returns(30..31), k in 0usize..30) {
        let w = segment_weights(&seg, 3);
        let n = w.len();
        let (r, rf) = (&r[..n], vec![0.003; n]);
        let k = k.min(n);
        let whole = cumulative_return(&w, r, &rf).unwrap();
        let parts = cumulative_return(&w[..k], &r[..k], &rf[..k]).unwrap() * cumulative_return(&w[k..], &r[k..], &rf[k..]).unwrap();
        prop_assert!((whole - parts).abs() <= 1e-12 * whole.abs().max(1.0));
        prop_assert_eq!(n, 3 * seg.len());
    }

    #[test]
    fn clark_west_ignores_a_common_shift(recs in records(), shift in -0.05f64..0.05) {
        let moved: Vec<ForecastRecord> = recs
            .iter()
            .map(|r| ForecastRecord { realized: r.realized + shift, predicted: r.predicted + shift, benchmark: r.benchmark + shift, ..r.clone() })
            .collect();
        let a = clark_west(&recs, 2, 10).unwrap();
        let b = clark_west(&moved, 2, 10).unwrap();
        prop_assert!((a.statistic - b.statistic).abs() <= 1e-6 * a.statistic.abs().max(1.0));
    }

    #[test]
    fn r2_is_one_minus_the_mspe_ratio(recs in records()) {
        let r2 = r2_oos(&recs).unwrap();
        let ratio = mspe(&recs).unwrap() / benchmark_mspe(&recs).unwrap();
        prop_assert!((r2 - (1.0 - ratio)).abs() < 1e-12);
    }

    #[test]
    fn gains_never_deepen_a_drawdown(lr in returns(1..40), gain in 0.0f64..0.2, loss in 0.0f64..0.2) {
        let base = max_drawdown(&lr);
        let mut up = lr.clone();
        up.push(gain);
        prop_assert!((max_drawdown(&up) - base).abs() < 1e-12);
        let mut down = lr.clone();
        down.push(-loss);
        prop_assert!(max_drawdown(&down) >= base);
        prop_assert!(base >= 0.0);
    }

    #[test]
    fn constant_gross_gives_its_annualized_rate(g in 0.9f64..1.2, n in 1usize..20, horizon in prop::sample::select(vec![6usize, 12, 24])) {
        let c = cer(&vec![g; n], &UtilitySpec::default(), horizon).unwrap();
        prop_assert!((c - 100.0 * (g.powf(12.0 / horizon as f64) - 1.0)).abs() < 1e-9);
    }
}
