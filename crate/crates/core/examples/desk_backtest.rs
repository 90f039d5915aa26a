//! The small end-to-end scenario: runs a roster under the desk preset and
//! writes the full report set.
//!
//! cargo run --release --example desk_backtest -- [out_dir] [models]

use deepfolio::backtest::{emit_report, run_backtest, Preset, RunOptions, ScenarioConfig, REPORT_FILES};
use deepfolio::metrics::Subsample;
use deepfolio::models::ModelKind;

fn main() -> deepfolio::Result<()> {
    let mut args = std::env::args().skip(1);
    let out = args.next().unwrap_or_else(|| "runs/desk-example".into());
    let models = args.next().unwrap_or_else(|| "EH,OLS1,OLS2,OLS3,OLS4".into());

    let mut cfg = ScenarioConfig::preset(Preset::Desk);
    cfg.models = models.split(',').map(|m| m.parse::<ModelKind>()).collect::<deepfolio::Result<_>>()?;
    let panel = cfg.load_panel(None)?;
    let result = run_backtest(&panel, &cfg, &RunOptions::default())?;

    for m in &result.models {
        let p = m.portfolio(Subsample::Full).expect("full sample");
        let r2 = m.forecast(Subsample::Full).and_then(|e| e.r2_oos);
        println!(
            "{:<5} R2oos {:>8}  CER {:>7}  SR {:>6}  turnover {:6.2}%",
            m.model(),
            r2.map(|r| format!("{:.2}%", 100.0 * r)).unwrap_or_else(|| "-".into()),
            p.cer.map(|c| format!("{c:.2}%")).unwrap_or_else(|| "-".into()),
            p.sharpe.map(|s| format!("{s:.3}")).unwrap_or_else(|| "-".into()),
            p.turnover
        );
    }
    emit_report(&result, &out, true)?;
    println!("wrote {} files to {out}", REPORT_FILES.len());
    Ok(())
}
