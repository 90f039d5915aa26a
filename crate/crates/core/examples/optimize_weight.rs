//! Expected power utility over a weight grid and the optimum under each
//! constraint preset, for a two-outcome market and for simulated paths.
//!
//! cargo run --release --example optimize_weight -- [gamma]

use deepfolio::data::synthetic::synthetic_panel;
use deepfolio::data::{slice_window, Month};
use deepfolio::dynamics::{fit_dynamics, simulate_paths, ScenarioSet};
use deepfolio::models::{fit_model, ModelKind, ModelSpec, TrainingConfig};
use deepfolio::numerics::RngStream;
use deepfolio::portfolio::{optimize_weight, utility_curve, ConstraintPreset, UtilitySpec, GRID_STEP};

fn report(label: &str, set: &ScenarioSet, utility: &UtilitySpec) -> deepfolio::Result<()> {
    let curve = utility_curve(set, -1.0, 2.0, 0.5, utility)?;
    let points: Vec<String> = (0..curve.expected_utility.len())
        .map(|i| format!("{:+.1}:{:.5}", curve.weight(i), curve.expected_utility[i]))
        .collect();
    println!("{label}\n  E[U] at {}", points.join("  "));
    let d = optimize_weight(set, ConstraintPreset::Baseline.bounds(), utility, GRID_STEP)?;
    for p in &d.presets {
        println!("  {:<10} weight {:+.3}  E[U] {:.6}", p.preset.name(), p.weight, p.expected_utility);
    }
    Ok(())
}

fn main() -> deepfolio::Result<()> {
    let gamma = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(4.0);
    let utility = UtilitySpec::new(gamma)?;

    let coin = ScenarioSet::from_returns(vec![vec![0.08], vec![-0.06]], vec![0.003])?;
    report("two outcomes, +8% / -6% log excess return", &coin, &utility)?;

    let panel = synthetic_panel(7, Month::new(1945, 1)?, Month::new(2018, 12)?);
    let date = Month::new(2001, 3)?;
    let spec = ModelSpec::standard(ModelKind::Ols3, 120);
    let window = slice_window(&panel, date, spec.window)?;
    let model = fit_model(&window, &spec, None, &TrainingConfig::default(), &RngStream::new(0, "unused"))?;
    let (ar1, cov) = fit_dynamics(&model, &window)?;
    let set = simulate_paths(&model, &ar1, &cov, &window, 6, 4000, &RngStream::new(5, "paths"))?;
    report(&format!("OLS3 paths from {date}, six months"), &set, &utility)?;
    Ok(())
}
