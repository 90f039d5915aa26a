//! Checks every hand-derived network gradient against central differences.
//!
//! cargo run --release --example gradient_check -- [seeds]

use std::time::Instant;

use deepfolio::models::gradsuite::{gradient_suite, TOLERANCE};

fn main() -> deepfolio::Result<()> {
    let seeds = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(20);
    let started = Instant::now();
    let reports = gradient_suite(seeds)?;
    for r in &reports {
        println!(
            "{:<14} {:>5} params  max rel err {:.2e}  {}",
            r.case,
            r.parameters,
            r.max_rel_error,
            if r.passed() { "ok" } else { "FAIL" }
        );
    }
    println!(
        "{} cases x {seeds} seeds, tolerance {TOLERANCE:e}, {:.1}s",
        reports.len(),
        started.elapsed().as_secs_f64()
    );
    Ok(())
}
