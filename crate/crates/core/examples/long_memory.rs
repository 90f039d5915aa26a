//! The recurrent network against a feedforward net on a task whose target is
//! the input six steps back.
//!
//! cargo run --release --example long_memory -- [seeds]

use deepfolio::models::tasks::long_memory_trial;
use deepfolio::models::HyperParams;
use deepfolio::numerics::Activation;

fn main() -> deepfolio::Result<()> {
    let seeds: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(5);
    let hp = HyperParams {
        learning_rate: 0.01,
        activation: Activation::Relu,
        ..HyperParams::default()
    };
    let mut ratios = Vec::new();
    for seed in 0..seeds {
        let t = long_memory_trial(seed, 300, 200, &hp)?;
        println!("seed {seed}: LSTM mse {:.4}  MLP mse {:.4}  ratio {:.3}", t.lstm_mse, t.mlp_mse, t.ratio());
        ratios.push(t.ratio());
    }
    ratios.sort_by(f64::total_cmp);
    println!("median ratio {:.3}", ratios[ratios.len() / 2]);
    Ok(())
}
