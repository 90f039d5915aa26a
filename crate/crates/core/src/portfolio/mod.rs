//! Power utility, portfolio accounting, expected-utility allocation,
//! transaction costs and the walk-forward strategy.

mod accounting;
mod costs;
mod optimize;
mod strategy;
mod utility;

pub use accounting::{cumulative_return, monthly_factor, risky_factor, segment_weights};
pub use costs::{apply_transaction_costs, carried_weight, trades, TurnoverConvention};
pub use optimize::{
    decide, evaluation_hull, optimize_weight, utility_curve, AllocationDecision, PresetChoice, UtilityCurve, GRID_STEP,
    RUIN_UTILITY,
};
pub use strategy::{
    rebalance_dates, rebalance_step, realize, realize_on, Market, run_strategy, search_step, Incident, PortfolioPath, RebalanceOutcome, RunControl,
    SearchConfig, StepCache, StrategyConfig, StrategyRun, RUIN_FLOOR, STEP_FORMAT,
};
pub use utility::{power_utility, ConstraintPreset, RebalanceSchedule, UtilitySpec, WeightConstraint};
