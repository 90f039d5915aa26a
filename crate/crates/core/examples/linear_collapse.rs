//! A one-unit identity network trained without regularization reaches the
//! least-squares fit.
//!
//! cargo run --release --example linear_collapse -- [seed]

use deepfolio::models::tasks::linear_collapse;
use deepfolio::models::HyperParams;
use deepfolio::numerics::Activation;

fn main() -> deepfolio::Result<()> {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(0);
    let hp = HyperParams {
        learning_rate: 0.01,
        activation: Activation::Identity,
        ..HyperParams::default()
    };
    let c = linear_collapse(seed, &hp)?;
    println!(
        "largest prediction gap to OLS {:.2e} after {} epochs (validation loss {:.3e})",
        c.max_abs_gap, c.epochs_run, c.final_val_loss
    );
    Ok(())
}
