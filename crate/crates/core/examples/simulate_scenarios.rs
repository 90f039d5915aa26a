//! Fits a predictive regression and its predictor dynamics, then simulates
//! joint return paths over the holding horizon.
//!
//! cargo run --release --example simulate_scenarios -- [paths]

use deepfolio::data::synthetic::synthetic_panel;
use deepfolio::data::{slice_window, Month};
use deepfolio::dynamics::{fit_dynamics, simulate_paths};
use deepfolio::models::{fit_model, ModelKind, ModelSpec, TrainingConfig};
use deepfolio::numerics::RngStream;

fn main() -> deepfolio::Result<()> {
    let n_paths = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(5000);
    let panel = synthetic_panel(7, Month::new(1945, 1)?, Month::new(2018, 12)?);
    let date = Month::new(1995, 12)?;
    let spec = ModelSpec::standard(ModelKind::Ols4, 120);
    let window = slice_window(&panel, date, spec.window)?;
    let model = fit_model(&window, &spec, None, &TrainingConfig::default(), &RngStream::new(0, "unused"))?;
    let (ar1, cov) = fit_dynamics(&model, &window)?;
    println!("residual covariance {0}x{0} from {1} months, smallest eigenvalue {2:.3e}", cov.dim, cov.observations, cov.min_eigenvalue);

    let horizon = 6;
    let set = simulate_paths(&model, &ar1, &cov, &window, horizon, n_paths, &RngStream::new(11, "paths"))?;
    let mut sums: Vec<f64> = (0..set.n_paths).map(|p| set.path(p).iter().sum()).collect();
    sums.sort_by(f64::total_cmp);
    let mean = sums.iter().sum::<f64>() / sums.len() as f64;
    let q = |p: f64| sums[((sums.len() - 1) as f64 * p).round() as usize];
    println!("{} paths of {horizon} months from {date}", set.n_paths);
    println!("cumulative excess log return: mean {mean:+.4}, 5% {:+.4}, median {:+.4}, 95% {:+.4}", q(0.05), q(0.5), q(0.95));
    println!("risk-free log yield held at {:.5}", set.rf[0]);
    Ok(())
}
