//! Fundamental price, order flow, inventory and the cost functionals.

mod cost;
mod params;
mod path;
mod strategy;

pub use cost::{CostModel, CostReport, PenaltyModel, RunningCost};
pub use params::{Coefficients, JumpDistribution, MarketParams};
pub use path::{
    simulate_ensemble, simulate_path, simulate_steps, splitmix64, steps_for, stream_rng, stream_seed, Flow,
    MarketPath,
};
pub use strategy::{evolve_inventory, write_trace_csv, InventoryTrace, Strategy};
