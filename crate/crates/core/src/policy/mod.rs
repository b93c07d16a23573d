//! Inaction region, jump map and the synthesized execution strategy.

mod extract;
mod region;
mod rollout;
mod synthesize;

pub use extract::Policy;
pub use region::{inaction_region, FieldObstacle, Interval, ObstacleSource, Region, TIE_RELATIVE};
pub use rollout::{greedy_strategy, rollout, PathRecord, RolloutConfig, RolloutReport, StrategyStats, Summary};
pub use synthesize::synthesize;
