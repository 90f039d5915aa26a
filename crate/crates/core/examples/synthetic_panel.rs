//! Generates a synthetic monthly panel, writes it as CSV and reads it back
//! through the loader.
//!
//! cargo run --example synthetic_panel -- [out.csv] [seed]

use deepfolio::data::synthetic::synthetic_panel;
use deepfolio::data::{load_panel, recession_mask, save_panel, DataSchema, Month, RecessionCalendar};

fn main() -> deepfolio::Result<()> {
    let mut args = std::env::args().skip(1);
    let out = args.next().unwrap_or_else(|| "synthetic_panel.csv".into());
    let seed = args.next().and_then(|s| s.parse().ok()).unwrap_or(7);

    let panel = synthetic_panel(seed, Month::new(1945, 1)?, Month::new(2018, 12)?);
    save_panel(&panel, &out)?;
    let back = load_panel(&out, &DataSchema::default())?;
    assert_eq!(back.content_hash(), panel.content_hash());

    let r = back.excess_return();
    let mean = r.iter().sum::<f64>() / r.len() as f64;
    let recessions = recession_mask(&back, &RecessionCalendar::nber()).iter().filter(|m| **m).count();
    println!("wrote {out}: {} months, {} predictors", back.len(), back.n_predictors());
    println!("mean monthly excess log return {:.5}, {recessions} recession months", mean);
    println!("content hash {}", &back.content_hash()[..16]);
    Ok(())
}
