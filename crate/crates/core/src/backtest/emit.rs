//! Report files under a run directory.

use std::fs;
use std::path::Path;

use serde_json::{json, Map, Value};

use super::run::BacktestResult;
use crate::error::{Error, Result};

pub const RESULT_FILE: &str = "result.json";
pub const PROVENANCE_FILE: &str = "provenance.json";
pub const REPORT_FILE: &str = "report.json";
pub const ACCURACY_FILE: &str = "accuracy.csv";
pub const PERFORMANCE_FILE: &str = "performance.csv";
pub const MOMENTS_FILE: &str = "moments.csv";
pub const RISK_FILE: &str = "risk.csv";
pub const VARIANTS_FILE: &str = "variants.csv";
pub const CUMULATIVE_FILE: &str = "cumulative_returns.csv";
pub const PATHS_FILE: &str = "portfolio_paths.csv";
pub const FORECASTS_FILE: &str = "forecasts.csv";
pub const INCIDENTS_FILE: &str = "incidents.csv";

/// Every file `emit_report` writes.
pub const REPORT_FILES: [&str; 12] = [
    RESULT_FILE,
    PROVENANCE_FILE,
    REPORT_FILE,
    ACCURACY_FILE,
    PERFORMANCE_FILE,
    MOMENTS_FILE,
    RISK_FILE,
    VARIANTS_FILE,
    CUMULATIVE_FILE,
    PATHS_FILE,
    FORECASTS_FILE,
    INCIDENTS_FILE,
];

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

struct Table {
    rows: Vec<Vec<String>>,
}

impl Table {
    fn new(header: &[&str]) -> Self {
        Table {
            rows: vec![header.iter().map(|s| s.to_string()).collect()],
        }
    }

    fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    fn write(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path).map_err(|e| Error::io(path, e.into()))?;
        for r in &self.rows {
            w.write_record(r).map_err(|e| Error::io(path, e.into()))?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

/// Writes the report file set into `dir`. An existing nonempty directory is
/// refused unless `overwrite` is set; with it, only the report files are
/// replaced.
pub fn emit_report(result: &BacktestResult, dir: impl AsRef<Path>, overwrite: bool) -> Result<()> {
    let dir = dir.as_ref();
    if dir.exists() {
        let nonempty = fs::read_dir(dir).map_err(|e| Error::io(dir, e))?.next().is_some();
        if nonempty && !overwrite {
            return Err(Error::OutputExists(dir.to_path_buf()));
        }
    }
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;

    write_bytes(&dir.join(RESULT_FILE), &result.to_json()?)?;
    write_bytes(&dir.join(PROVENANCE_FILE), &serde_json::to_vec_pretty(&result.provenance)?)?;
    write_bytes(&dir.join(REPORT_FILE), &serde_json::to_vec_pretty(&structured(result))?)?;

    let mut acc = Table::new(&["model", "subsample", "n", "mspe", "benchmark_mspe", "r2_oos", "cw_stat", "cw_p"]);
    let mut perf = Table::new(&["model", "subsample", "months", "horizons", "cer", "sharpe", "alpha", "alpha_p", "unreliable"]);
    let mut mom = Table::new(&["model", "subsample", "mean", "sd", "skewness", "kurtosis"]);
    let mut risk = Table::new(&["model", "subsample", "max_drawdown", "max_one_month_loss", "turnover"]);
    let mut cum = Table::new(&["date", "model", "cumulative_log_return"]);
    let mut paths = Table::new(&["date", "model", "weight", "log_return", "cost_adjusted"]);
    let mut fc = Table::new(&["date", "model", "predicted", "realized", "benchmark", "residual_variance"]);
    let mut inc = Table::new(&["model", "date", "stage", "message"]);
    for m in &result.models {
        let id = m.model().to_string();
        for e in &m.forecast_eval {
            acc.push(vec![
                id.clone(),
                e.subsample.to_string(),
                e.n.to_string(),
                e.mspe.to_string(),
                e.benchmark_mspe.to_string(),
                opt(e.r2_oos),
                opt(e.clark_west.map(|t| t.statistic)),
                opt(e.clark_west.map(|t| t.p_value)),
            ]);
        }
        for e in &m.portfolio_eval {
            let sub = e.subsample.to_string();
            perf.push(vec![
                id.clone(),
                sub.clone(),
                e.months.to_string(),
                e.horizons.to_string(),
                opt(e.cer),
                opt(e.sharpe),
                opt(e.alpha_vs_eh.map(|t| t.estimate)),
                opt(e.alpha_vs_eh.map(|t| t.p_value)),
                m.unreliable.to_string(),
            ]);
            mom.push(vec![
                id.clone(),
                sub.clone(),
                opt(e.moments.map(|x| x.mean)),
                opt(e.moments.map(|x| x.sd)),
                opt(e.moments.map(|x| x.skewness)),
                opt(e.moments.map(|x| x.kurtosis)),
            ]);
            risk.push(vec![
                id.clone(),
                sub,
                e.max_drawdown.to_string(),
                e.max_one_month_loss.to_string(),
                e.turnover.to_string(),
            ]);
        }
        let p = &m.run.path;
        for (i, c) in p.cumulative().into_iter().enumerate() {
            cum.push(vec![p.months[i].to_string(), id.clone(), c.to_string()]);
            paths.push(vec![
                p.months[i].to_string(),
                id.clone(),
                p.weights[i].to_string(),
                p.log_returns[i].to_string(),
                p.cost_adjusted[i].to_string(),
            ]);
        }
        for f in &m.run.forecasts {
            fc.push(vec![
                f.date.to_string(),
                id.clone(),
                f.predicted.to_string(),
                f.realized.to_string(),
                f.benchmark.to_string(),
                f.residual_variance.to_string(),
            ]);
        }
        for i in &m.run.incidents {
            inc.push(vec![i.model.clone(), i.date.to_string(), i.stage.clone(), i.message.clone()]);
        }
    }
    let mut var = Table::new(&["model", "constraint", "tx_cost", "cer", "sharpe", "turnover", "max_drawdown"]);
    for v in &result.variants {
        var.push(vec![
            v.model.clone(),
            v.constraint.to_string(),
            v.tx_cost.to_string(),
            opt(v.cer),
            opt(v.sharpe),
            v.turnover.to_string(),
            v.max_drawdown.to_string(),
        ]);
    }
    for (name, table) in [
        (ACCURACY_FILE, &acc),
        (PERFORMANCE_FILE, &perf),
        (MOMENTS_FILE, &mom),
        (RISK_FILE, &risk),
        (VARIANTS_FILE, &var),
        (CUMULATIVE_FILE, &cum),
        (PATHS_FILE, &paths),
        (FORECASTS_FILE, &fc),
        (INCIDENTS_FILE, &inc),
    ] {
        table.write(&dir.join(name))?;
    }
    Ok(())
}

/// `scenario → model → subsample → metric → value`.
fn structured(result: &BacktestResult) -> Value {
    let mut models = Map::new();
    for m in &result.models {
        let mut subs = Map::new();
        for e in &m.portfolio_eval {
            let entry = subs.entry(e.subsample.to_string()).or_insert_with(|| json!({}));
            let obj = entry.as_object_mut().expect("object");
            obj.insert("cer".into(), json!(e.cer));
            obj.insert("sharpe".into(), json!(e.sharpe));
            obj.insert("max_drawdown".into(), json!(e.max_drawdown));
            obj.insert("max_one_month_loss".into(), json!(e.max_one_month_loss));
            obj.insert("turnover".into(), json!(e.turnover));
            obj.insert("alpha_vs_eh".into(), json!(e.alpha_vs_eh.map(|t| t.estimate)));
            obj.insert("alpha_p".into(), json!(e.alpha_vs_eh.map(|t| t.p_value)));
            if let Some(x) = e.moments {
                obj.insert("mean".into(), json!(x.mean));
                obj.insert("sd".into(), json!(x.sd));
                obj.insert("skewness".into(), json!(x.skewness));
                obj.insert("kurtosis".into(), json!(x.kurtosis));
            }
        }
        for e in &m.forecast_eval {
            let entry = subs.entry(e.subsample.to_string()).or_insert_with(|| json!({}));
            let obj = entry.as_object_mut().expect("object");
            obj.insert("mspe".into(), json!(e.mspe));
            obj.insert("r2_oos".into(), json!(e.r2_oos));
            obj.insert("cw_stat".into(), json!(e.clark_west.map(|t| t.statistic)));
            obj.insert("cw_p".into(), json!(e.clark_west.map(|t| t.p_value)));
        }
        models.insert(m.model().to_string(), Value::Object(subs));
    }
    let mut top = Map::new();
    top.insert(result.provenance.scenario.clone(), Value::Object(models));
    Value::Object(top)
}

/// Reads the result document written by `emit_report`.
pub fn load_result(dir: impl AsRef<Path>) -> Result<BacktestResult> {
    let path = dir.as_ref().join(RESULT_FILE);
    let bytes = fs::read(&path).map_err(|e| Error::io(&path, e))?;
    BacktestResult::from_json(&bytes)
}
