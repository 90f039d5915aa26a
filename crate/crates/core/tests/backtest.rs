use std::fs;

use deepfolio::backtest::{emit_report, load_result, run_backtest, Preset, RunOptions, ScenarioConfig, REPORT_FILES};
use deepfolio::data::{Month, Panel, RecessionCalendar};
use deepfolio::models::ModelKind;
use deepfolio::Error;

fn m(y: i32, mo: u32) -> Month {
    Month::new(y, mo).unwrap()
}

/// Three rebalance dates (1990-01, -04, -07) with a small path count.
fn small(models: &[ModelKind]) -> (ScenarioConfig, Panel) {
    let mut cfg = ScenarioConfig::preset(Preset::Desk);
    cfg.models = models.to_vec();
    cfg.forecast_start = m(1990, 2);
    cfg.end = Some(m(1990, 10));
    cfg.n_paths = 300;
    let panel = cfg.load_panel(None).unwrap();
    (cfg, panel)
}

fn csv_rows(path: &std::path::Path) -> Vec<csv::StringRecord> {
    csv::Reader::from_path(path).unwrap().records().map(|r| r.unwrap()).collect()
}

#[test]
fn eh_smoke_run() {
    let (cfg, panel) = small(&[ModelKind::Eh]);
    let result = run_backtest(&panel, &cfg, &RunOptions::default()).unwrap();
    assert_eq!(result.models.len(), 1);
    let eh = &result.models[0];
    assert_eq!(eh.run.rebalance_dates, vec![m(1990, 1), m(1990, 4), m(1990, 7)]);
    assert_eq!(eh.run.forecasts.len(), 3);
    assert_eq!(eh.run.path.months.len(), 9);
    assert!(result.benchmark.is_none());
    assert!(eh.run.incidents.is_empty());
    for d in &eh.run.decisions {
        assert!(cfg.weight_constraint().unwrap().contains(d.weight));
    }
}

#[test]
fn reruns_are_identical() {
    let (cfg, panel) = small(&[ModelKind::Eh, ModelKind::Ols1]);
    let a = run_backtest(&panel, &cfg, &RunOptions::default()).unwrap();
    let b = run_backtest(&panel, &cfg, &RunOptions::default()).unwrap();
    assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
}

#[test]
fn a_model_does_not_depend_on_its_roster() {
    let (cfg_all, panel) = small(&[ModelKind::Eh, ModelKind::Ols1, ModelKind::Ols3]);
    let all = run_backtest(&panel, &cfg_all, &RunOptions::default()).unwrap();
    let (cfg_one, _) = small(&[ModelKind::Ols1]);
    let one = run_backtest(&panel, &cfg_one, &RunOptions::default()).unwrap();

    let alone = one.model("OLS1").unwrap();
    let together = all.model("OLS1").unwrap();
    assert_eq!(alone.run, together.run);
    assert_eq!(alone.portfolio_eval, together.portfolio_eval);
    assert_eq!(alone.forecast_eval, together.forecast_eval);
    assert_eq!(one.benchmark.as_ref(), Some(&all.model("EH").unwrap().run));
}

#[test]
fn interrupted_run_resumes_from_its_cache() {
    let (cfg, panel) = small(&[ModelKind::Eh, ModelKind::Ols2]);
    let dir = tempfile::tempdir().unwrap();
    let cached = RunOptions {
        cache_dir: Some(dir.path().to_path_buf()),
        stop_after: Some(1),
    };
    match run_backtest(&panel, &cfg, &cached) {
        Err(Error::Interrupted(_)) => {}
        other => panic!("expected an interruption, got {other:?}"),
    }
    let resumed = run_backtest(
        &panel,
        &cfg,
        &RunOptions {
            stop_after: None,
            ..cached
        },
    )
    .unwrap();
    let fresh = run_backtest(&panel, &cfg, &RunOptions::default()).unwrap();
    assert_eq!(resumed.to_json().unwrap(), fresh.to_json().unwrap());
}

#[test]
fn report_files_and_reload() {
    let (cfg, panel) = small(&[ModelKind::Eh, ModelKind::Ols1]);
    let result = run_backtest(&panel, &cfg, &RunOptions::default()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    emit_report(&result, dir.path(), false).unwrap();
    for f in REPORT_FILES {
        assert!(dir.path().join(f).is_file(), "{f} missing");
    }

    let months = result.models[0].run.path.months.len();
    assert_eq!(csv_rows(&dir.path().join("cumulative_returns.csv")).len(), months * result.models.len());
    assert_eq!(csv_rows(&dir.path().join("forecasts.csv")).len(), 3 * result.models.len());
    // every preset x every cost level per model
    assert_eq!(csv_rows(&dir.path().join("variants.csv")).len(), 3 * cfg.variant_costs.len() * result.models.len());

    let report: serde_json::Value = serde_json::from_slice(&fs::read(dir.path().join("report.json")).unwrap()).unwrap();
    assert!(report[&cfg.name]["OLS1"]["full"]["cer"].is_number());

    match emit_report(&result, dir.path(), false) {
        Err(Error::OutputExists(_)) => {}
        other => panic!("expected a refusal, got {other:?}"),
    }
    emit_report(&result, dir.path(), true).unwrap();

    let mut back = load_result(dir.path()).unwrap();
    assert_eq!(back, result);
    back.recompute(&RecessionCalendar::nber()).unwrap();
    assert_eq!(back, result);
}

#[test]
fn empty_roster_writes_provenance_and_empty_tables() {
    let (cfg, panel) = small(&[]);
    let result = run_backtest(&panel, &cfg, &RunOptions::default()).unwrap();
    assert!(result.models.is_empty() && result.benchmark.is_none());
    let dir = tempfile::tempdir().unwrap();
    emit_report(&result, dir.path(), false).unwrap();
    let prov: serde_json::Value = serde_json::from_slice(&fs::read(dir.path().join("provenance.json")).unwrap()).unwrap();
    assert_eq!(prov["seed"], 42);
    assert_eq!(prov["panel_hash"].as_str().unwrap(), panel.content_hash());
    for f in ["accuracy.csv", "performance.csv", "cumulative_returns.csv", "incidents.csv"] {
        assert!(csv_rows(&dir.path().join(f)).is_empty(), "{f} has rows");
    }
}

#[test]
fn transaction_costs_keep_decisions_and_lower_returns() {
    let (mut cfg, panel) = small(&[ModelKind::Ols2]);
    let free = run_backtest(&panel, &cfg, &RunOptions::default()).unwrap();
    cfg.tx_cost = 0.005;
    let costly = run_backtest(&panel, &cfg, &RunOptions::default()).unwrap();
    let run = |r: &deepfolio::backtest::BacktestResult| r.models[0].run.clone();
    // same decisions, lower realized returns
    assert_eq!(run(&free).segment_weights, run(&costly).segment_weights);
    let total = |r: &deepfolio::backtest::BacktestResult| r.models[0].run.path.cost_adjusted.iter().sum::<f64>();
    assert!(total(&costly) < total(&free));
}

#[test]
fn validation_rejects_impossible_scenarios() {
    let (mut cfg, panel) = small(&[ModelKind::Ols4]);
    cfg.forecast_start = m(1972, 2);
    assert!(matches!(run_backtest(&panel, &cfg, &RunOptions::default()), Err(Error::Validation(_))));

    let (mut cfg, panel) = small(&[ModelKind::Eh, ModelKind::Eh]);
    assert!(matches!(cfg.validate(&panel), Err(Error::Validation(_))));
    cfg.models = vec![ModelKind::Eh];
    cfg.end = Some(m(1995, 1));
    assert!(matches!(cfg.validate(&panel), Err(Error::Validation(_))));
}
