//! Random hyperparameter search for a feedforward net followed by an
//! ensemble fit with the winning draw.
//!
//! cargo run --release --example hyper_search -- [budget]

use deepfolio::data::synthetic::synthetic_panel;
use deepfolio::data::{slice_window, Month};
use deepfolio::models::{fit_ensemble, random_search, HyperBox, ModelKind, ModelSpec, TrainingConfig};
use deepfolio::numerics::RngStream;

fn main() -> deepfolio::Result<()> {
    let budget = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(8);
    let panel = synthetic_panel(7, Month::new(1945, 1)?, Month::new(2018, 12)?);
    let spec = ModelSpec::standard(ModelKind::Nn2, 120);
    let window = slice_window(&panel, Month::new(1985, 6)?, spec.window)?;
    let hbox = HyperBox {
        max_epochs: 200,
        patience: 20,
        ..HyperBox::default()
    };
    let cfg = TrainingConfig::default();
    let stream = RngStream::new(3, "search-example");

    let outcome = random_search(&window, &spec, &hbox, budget, &cfg, &stream.child("search"))?;
    for (i, (hp, loss)) in outcome.candidates.iter().zip(&outcome.val_losses).enumerate() {
        let mark = if i == outcome.best_index { "*" } else { " " };
        let loss = loss.map(|l| format!("{l:.5}")).unwrap_or_else(|| "diverged".into());
        println!(
            "{mark} lr {:.4}  decay {:.5}  dropout {:.2}  {:<8} val loss {loss}",
            hp.learning_rate, hp.weight_decay, hp.dropout, hp.activation.to_string()
        );
    }

    let model = fit_ensemble(&window, &spec, &outcome.best, &cfg, &stream.child("fit"))?;
    let (mean, var) = model.predict(&window)?;
    println!("{} ensemble forecast {mean:+.5}, residual sd {:.5}", spec.kind, var.sqrt());
    Ok(())
}
