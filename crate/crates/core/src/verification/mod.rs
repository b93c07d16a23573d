//! Oracles and property checks for the model, the solver and the policy.

pub mod density;
pub mod dpp;
pub mod ladder;
pub mod mini;
pub mod regularity;
mod suite;

pub use suite::{run_suite, Check, Status, SuiteConfig, SuiteReport};
