//! Command-line front end.
//!
//! Exit codes: 0 success, 1 usage or validation failure, 2 runtime error.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::backtest::{emit_report, load_result, run_backtest, Preset, RunOptions, ScenarioConfig};
use crate::data::{Panel, RecessionCalendar};
use crate::error::{Error, Result};
use crate::metrics::Subsample;
use crate::models::gradsuite::gradient_suite;
use crate::models::ModelKind;
use crate::portfolio::{rebalance_dates, ConstraintPreset};
use crate::selftest;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "deepfolio", version, about = "Return forecasting and power-utility portfolio backtests")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check a configuration and its data, print a summary.
    Validate(Common),
    /// Run the scenario and write reports.
    Run(Common),
    /// Recompute reports from a finished run directory.
    Report(Common),
    /// Finite-difference check of the network gradients.
    Gradcheck {
        #[arg(long, default_value_t = 20)]
        seeds: usize,
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Run the built-in oracle checks.
    Selftest {
        #[arg(long)]
        jobs: Option<usize>,
    },
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Scenario file (TOML).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Comma-separated model roster, e.g. EH,OLS1,LSTM.
    #[arg(long, value_delimiter = ',')]
    models: Option<Vec<String>>,
    /// desk | paper-6m | paper-2y | paper-20y
    #[arg(long)]
    preset: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long = "tx-cost")]
    tx_cost: Option<f64>,
    /// baseline | no-borrow | long-only
    #[arg(long)]
    constraint: Option<String>,
    /// Replace report files in an existing output directory.
    #[arg(long)]
    overwrite: bool,
    /// Worker threads.
    #[arg(long)]
    jobs: Option<usize>,
    /// Directory for resumable per-step results.
    #[arg(long)]
    cache: Option<PathBuf>,
}

/// Configuration after applying the preset and flag overrides. Invalid
/// overrides are validation errors.
fn scenario(c: &Common) -> Result<(ScenarioConfig, Panel)> {
    let mut cfg = match &c.config {
        Some(p) => ScenarioConfig::load(p).map_err(|e| Error::Validation(e.to_string()))?,
        None => ScenarioConfig::default(),
    };
    if let Some(p) = &c.preset {
        let preset: Preset = p.parse().map_err(|e: Error| Error::Validation(e.to_string()))?;
        preset.apply(&mut cfg);
    }
    if let Some(models) = &c.models {
        cfg.models = models
            .iter()
            .filter(|m| !m.trim().is_empty())
            .map(|m| m.parse::<ModelKind>())
            .collect::<Result<_>>()
            .map_err(|e| Error::Validation(e.to_string()))?;
    }
    if let Some(s) = c.seed {
        cfg.seed = s;
    }
    if let Some(t) = c.tx_cost {
        cfg.tx_cost = t;
    }
    if let Some(k) = &c.constraint {
        cfg.constraint = k.parse::<ConstraintPreset>().map_err(|e| Error::Validation(e.to_string()))?;
        cfg.bounds = None;
    }
    let base = c.config.as_ref().and_then(|p| p.parent());
    let panel = cfg.load_panel(base).map_err(|e| Error::Validation(e.to_string()))?;
    cfg.validate(&panel)?;
    Ok((cfg, panel))
}

fn set_jobs(jobs: Option<usize>) {
    if let Some(j) = jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(j.max(1)).build_global() {
            log::warn!("could not size the worker pool: {e}");
        }
    }
}

fn out_dir(c: &Common, cfg: &ScenarioConfig) -> PathBuf {
    c.out.clone().unwrap_or_else(|| PathBuf::from("runs").join(&cfg.name))
}

fn summary(cfg: &ScenarioConfig, panel: &Panel) -> Result<String> {
    let end = cfg.end_month(panel)?;
    let dates = rebalance_dates(cfg.forecast_start, end, cfg.interval);
    let source = match (&cfg.data.path, &cfg.data.synthetic) {
        (Some(p), _) => p.display().to_string(),
        (None, Some(s)) => format!("synthetic (seed {})", s.seed),
        (None, None) => "none".into(),
    };
    Ok(format!(
        "scenario {}\npanel {} ({} .. {}, {} months, {} predictors)\nmodels {}\nhorizon {} months, rebalance every {}, {} rebalance dates from {} to {end}\nconstraint [{}, {}], tx cost {}, gamma {}, {} paths, seed {}",
        cfg.name,
        source,
        panel.start().map(|m| m.to_string()).unwrap_or_default(),
        panel.end().map(|m| m.to_string()).unwrap_or_default(),
        panel.len(),
        panel.n_predictors(),
        cfg.models.iter().map(|m| m.id()).collect::<Vec<_>>().join(","),
        cfg.horizon,
        cfg.interval,
        dates.len(),
        cfg.forecast_start,
        cfg.weight_constraint()?.lower,
        cfg.weight_constraint()?.upper,
        cfg.tx_cost,
        cfg.gamma,
        cfg.n_paths,
        cfg.seed
    ))
}

fn print_table(result: &crate::backtest::BacktestResult) {
    println!("{:<6} {:>10} {:>9} {:>9} {:>8} {:>9}", "model", "MSPE", "R2oos%", "CER%", "SR", "turnover");
    let f = |v: Option<f64>, scale: f64| v.map(|x| format!("{:.3}", x * scale)).unwrap_or_else(|| "-".into());
    for m in &result.models {
        let fe = m.forecast(Subsample::Full);
        let pe = m.portfolio(Subsample::Full);
        println!(
            "{:<6} {:>10} {:>9} {:>9} {:>8} {:>9}{}",
            m.model(),
            fe.map(|e| format!("{:.3e}", e.mspe)).unwrap_or_else(|| "-".into()),
            f(fe.and_then(|e| e.r2_oos), 100.0),
            f(pe.and_then(|e| e.cer), 1.0),
            f(pe.and_then(|e| e.sharpe), 1.0),
            f(pe.map(|e| e.turnover), 1.0),
            if m.unreliable { "  (unreliable)" } else { "" }
        );
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Validation(_) | Error::Config(_) | Error::OutputExists(_) => EXIT_INVALID,
        _ => EXIT_RUNTIME,
    }
}

fn execute(cmd: Command) -> Result<i32> {
    match cmd {
        Command::Validate(c) => {
            let (cfg, panel) = scenario(&c)?;
            println!("{}", summary(&cfg, &panel)?);
            println!("ok");
            Ok(EXIT_OK)
        }
        Command::Run(c) => {
            set_jobs(c.jobs);
            let (cfg, panel) = scenario(&c)?;
            let out = out_dir(&c, &cfg);
            if out.exists() && !c.overwrite && out.read_dir().map(|mut d| d.next().is_some()).unwrap_or(false) {
                return Err(Error::OutputExists(out));
            }
            eprintln!("{}", summary(&cfg, &panel)?);
            let result = run_backtest(
                &panel,
                &cfg,
                &RunOptions {
                    cache_dir: c.cache.clone(),
                    stop_after: None,
                },
            )?;
            emit_report(&result, &out, c.overwrite)?;
            print_table(&result);
            println!("reports written to {}", out.display());
            Ok(EXIT_OK)
        }
        Command::Report(c) => {
            let dir = c
                .out
                .clone()
                .ok_or_else(|| Error::Validation("report needs --out pointing at a run directory".into()))?;
            let mut result = load_result(&dir)?;
            result.recompute(&RecessionCalendar::nber())?;
            emit_report(&result, &dir, true)?;
            print_table(&result);
            Ok(EXIT_OK)
        }
        Command::Gradcheck { seeds, jobs } => {
            set_jobs(jobs);
            let reports = gradient_suite(seeds)?;
            let mut ok = true;
            for r in &reports {
                ok &= r.passed();
                println!(
                    "{:<14} {:>6} params  max rel error {:.3e}  {}",
                    r.case,
                    r.parameters,
                    r.max_rel_error,
                    if r.passed() { "pass" } else { "FAIL" }
                );
            }
            Ok(if ok { EXIT_OK } else { EXIT_INVALID })
        }
        Command::Selftest { jobs } => {
            set_jobs(jobs);
            let checks = selftest::run_all();
            for c in &checks {
                println!("{} {:<22} {}", if c.passed { "pass" } else { "FAIL" }, c.name, c.detail);
            }
            Ok(if checks.iter().all(|c| c.passed) { EXIT_OK } else { EXIT_INVALID })
        }
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn main<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).try_init();
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
