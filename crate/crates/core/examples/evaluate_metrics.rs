//! Runs the OLS1 and historical-mean strategies over 1970-1990 of the
//! synthetic panel and evaluates them by subsample.
//!
//! cargo run --release --example evaluate_metrics

use deepfolio::data::synthetic::synthetic_panel;
use deepfolio::data::{Month, RecessionCalendar};
use deepfolio::metrics::{subsample_stats, EvalConfig};
use deepfolio::models::{ModelKind, ModelSpec};
use deepfolio::numerics::RngStream;
use deepfolio::portfolio::{run_strategy, RunControl, StrategyConfig};

fn main() -> deepfolio::Result<()> {
    let panel = synthetic_panel(7, Month::new(1945, 1)?, Month::new(1990, 12)?);
    let cfg = StrategyConfig {
        n_paths: 2000,
        ..StrategyConfig::default()
    };
    let (start, end) = (Month::new(1970, 2)?, Month::new(1990, 12)?);
    let run = |kind: ModelKind| {
        let spec = ModelSpec::standard(kind, 120);
        let stream = RngStream::new(42, format!("model/{}", kind.id()));
        run_strategy(&panel, &spec, &cfg, start, end, &stream, RunControl::default())
    };
    let eh = run(ModelKind::Eh)?;
    let ols = run(ModelKind::Ols1)?;

    let calendar = RecessionCalendar::nber();
    let (forecast, portfolio, notes) = subsample_stats(&ols.path, &ols.forecasts, Some(&eh.path), &calendar, &EvalConfig::default())?;
    let f = |v: Option<f64>| v.map(|x| format!("{x:8.3}")).unwrap_or_else(|| "       -".into());
    println!("{:<10} {:>5} {:>8} {:>8} {:>8}", "subsample", "n", "R2oos%", "CW", "CW p");
    for e in &forecast {
        println!(
            "{:<10} {:>5} {} {} {}",
            e.subsample.to_string(),
            e.n,
            f(e.r2_oos.map(|r| 100.0 * r)),
            f(e.clark_west.map(|t| t.statistic)),
            f(e.clark_west.map(|t| t.p_value))
        );
    }
    println!();
    println!("{:<10} {:>6} {:>8} {:>8} {:>8} {:>8} {:>8}", "subsample", "months", "CER%", "SR", "maxDD%", "turn%", "alpha p");
    for e in &portfolio {
        println!(
            "{:<10} {:>6} {} {} {:8.3} {:8.3} {}",
            e.subsample.to_string(),
            e.months,
            f(e.cer),
            f(e.sharpe),
            e.max_drawdown,
            e.turnover,
            f(e.alpha_vs_eh.map(|t| t.p_value))
        );
    }
    for n in notes {
        println!("note: {n}");
    }
    Ok(())
}
