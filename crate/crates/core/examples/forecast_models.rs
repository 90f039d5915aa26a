//! Fits every linear model and one feedforward net on a window of the
//! synthetic panel and prints their one-month-ahead forecasts.
//!
//! cargo run --release --example forecast_models -- [yyyymm]

use deepfolio::data::synthetic::synthetic_panel;
use deepfolio::data::{slice_window, Month};
use deepfolio::models::{fit_model, HyperParams, ModelKind, ModelSpec, TrainingConfig};
use deepfolio::numerics::RngStream;

fn main() -> deepfolio::Result<()> {
    let date = match std::env::args().nth(1) {
        Some(s) => Month::from_yyyymm(&s)?,
        None => Month::new(1990, 12)?,
    };
    let panel = synthetic_panel(7, Month::new(1945, 1)?, Month::new(2018, 12)?);
    let realized = panel.position(date.succ()).map(|i| panel.excess_return()[i]);

    let hp = HyperParams {
        learning_rate: 0.01,
        max_epochs: 200,
        patience: 20,
        ..HyperParams::default()
    };
    let cfg = TrainingConfig {
        ensemble_size: 3,
        ..TrainingConfig::default()
    };
    let stream = RngStream::new(1, "forecast-example");

    println!("forecasts made at the end of {date}");
    for kind in [ModelKind::Eh, ModelKind::Ols1, ModelKind::Ols2, ModelKind::Ols3, ModelKind::Ols4, ModelKind::Nn1] {
        let spec = ModelSpec::standard(kind, 120);
        let window = slice_window(&panel, date, spec.window)?;
        let model = fit_model(&window, &spec, Some(&hp), &cfg, &stream.child(kind.id()))?;
        let (mean, var) = model.predict(&window)?;
        println!(
            "{:<5} {:<12} {:>3} features  mean {:+.5}  residual sd {:.5}",
            kind.id(),
            spec.window.to_string(),
            model.feature_names.len(),
            mean,
            var.sqrt()
        );
    }
    if let Some(r) = realized {
        println!("realized excess log return over {}: {r:+.5}", date.succ());
    }
    Ok(())
}
