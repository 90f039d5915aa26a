//! Return forecasting and power-utility portfolio backtesting.
//!
//! The crate trains monthly equity-premium forecasters (historical mean,
//! OLS variants, feedforward networks and a stacked recurrent network with
//! LSTM cells) on rolling or expanding windows, turns each forecast into an
//! optimal stock/bill weight by Monte Carlo simulation of the predictive
//! distribution, and evaluates forecasts and realized portfolios.
//!
//! Runnable walkthroughs of each capability live in `examples/`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod backtest;
pub mod cli;
pub mod data;
pub mod dynamics;
pub mod error;
pub mod metrics;
pub mod models;
pub mod numerics;
pub mod portfolio;
pub mod selftest;

pub use error::{Error, Result};
