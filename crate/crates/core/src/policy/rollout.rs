use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::region::FieldObstacle;
use super::synthesize::synthesize;
use crate::error::Result;
use crate::lob::UtilityModel;
use crate::market::{simulate_steps, stream_seed, CostModel, MarketParams, MarketPath, PenaltyModel, Strategy};
use crate::qvi::ValueField;
use crate::stats::Estimate;

/// Buys everything available, up to the target, at every mesh point
/// without an order-flow arrival.
pub fn greedy_strategy(path: &MarketPath, params: &MarketParams) -> Result<Strategy> {
    let mut q = params.q0;
    let mut pi = 0.0;
    let mut jumps = Vec::new();
    for step in 0..path.n_steps() {
        for f in path.flows_at(step) {
            q = (q + f.size).max(0.0);
        }
        if path.has_flow_at(step) {
            continue;
        }
        let size = q.min(params.target - pi);
        if size > 0.0 {
            jumps.push((step, size));
            pi += size;
            q -= size;
        }
    }
    Strategy::jumps(0.0, path.n_steps(), path.dt(), jumps)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RolloutConfig {
    pub n_paths: usize,
    pub steps: usize,
    pub seed: u64,
    /// Ramp width used for the implementable smoothed strategy.
    pub smooth_delta: f64,
}

impl Default for RolloutConfig {
    fn default() -> Self {
        RolloutConfig { n_paths: 1000, steps: 200, seed: 20_240_601, smooth_delta: 0.02 }
    }
}

/// Plain and control-variate (on `X_T`) estimates of one quantity.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub plain: Estimate,
    pub controlled: Estimate,
}

impl Summary {
    pub fn new(samples: &[f64], x_t: &[f64], x_mean: Option<f64>) -> Summary {
        let plain = Estimate::from_samples(samples);
        let controlled = match x_mean {
            Some(m) => Estimate::with_control(samples, x_t, m),
            None => plain,
        };
        Summary { plain, controlled }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StrategyStats {
    pub name: String,
    pub j1: Summary,
    pub j: Summary,
    /// `J⁰` of the smoothed strategy; reported for the optimal strategy only.
    pub j0_smoothed: Option<Summary>,
    pub mean_shortfall: f64,
    pub mean_jumps: f64,
}

/// Per-path record of the synthesized strategy.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathRecord {
    pub seed: u64,
    pub j: f64,
    pub j0: f64,
    pub j1: f64,
    pub shortfall: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RolloutReport {
    pub config: RolloutConfig,
    /// Interpolated `v(0, x₀, 0, q₀)`.
    pub value: f64,
    pub tolerance: f64,
    pub optimal: StrategyStats,
    pub baselines: Vec<StrategyStats>,
    pub paths: Vec<PathRecord>,
}

impl RolloutReport {
    pub fn baseline(&self, name: &str) -> Option<&StrategyStats> {
        self.baselines.iter().find(|b| b.name == name)
    }
}

struct Outcome {
    x_t: f64,
    record: PathRecord,
    jumps: usize,
    smoothed_j0: f64,
    baselines: [(f64, f64, f64, usize); 3],
}

const BASELINES: [&str; 3] = ["twap", "terminal", "greedy"];

/// Monte Carlo evaluation of the synthesized strategy against the baselines
/// on a common set of paths.
pub fn rollout(
    field: &ValueField,
    utility: &UtilityModel,
    penalty: &PenaltyModel,
    params: &MarketParams,
    cfg: &RolloutConfig,
) -> Result<RolloutReport> {
    let src = FieldObstacle::new(field, utility, params);
    let cost = CostModel { utility, penalty, params };
    let dt = params.horizon / cfg.steps as f64;
    let outcomes: Vec<Outcome> = (0..cfg.n_paths as u64)
        .into_par_iter()
        .map(|i| -> Result<Outcome> {
            let seed = stream_seed(cfg.seed, i);
            let path = simulate_steps(params, cfg.steps, seed)?;
            let star = synthesize(&src, &path, params)?;
            let r = cost.evaluate(&path, &star)?;
            let smoothed = star.jump_smooth(cfg.smooth_delta, &path)?;
            let smoothed_j0 = cost.cost_j0(&path, &smoothed)?;
            let twap = Strategy::twap(0.0, params.target, cfg.steps, dt).make_admissible(&path, params)?;
            let idle = Strategy::idle(0.0, cfg.steps, dt);
            let greedy = greedy_strategy(&path, params)?;
            let mut baselines = [(0.0, 0.0, 0.0, 0); 3];
            for (slot, s) in baselines.iter_mut().zip([&twap, &idle, &greedy]) {
                let b = cost.evaluate(&path, s)?;
                *slot = (b.j1, b.j, b.shortfall, s.jump_list().len());
            }
            Ok(Outcome {
                x_t: path.terminal_x(),
                record: PathRecord { seed, j: r.j, j0: r.j0, j1: r.j1, shortfall: r.shortfall },
                jumps: star.jump_list().len(),
                smoothed_j0,
                baselines,
            })
        })
        .collect::<Result<_>>()?;

    let x_t: Vec<f64> = outcomes.iter().map(|o| o.x_t).collect();
    let x_mean = params.coefficients.euler_mean(params.x0, params.horizon, cfg.steps);
    let n = outcomes.len().max(1) as f64;
    let col = |f: &dyn Fn(&Outcome) -> f64| -> Vec<f64> { outcomes.iter().map(f).collect() };
    let optimal = StrategyStats {
        name: "optimal".into(),
        j1: Summary::new(&col(&|o| o.record.j1), &x_t, x_mean),
        j: Summary::new(&col(&|o| o.record.j), &x_t, x_mean),
        j0_smoothed: Some(Summary::new(&col(&|o| o.smoothed_j0), &x_t, x_mean)),
        mean_shortfall: col(&|o| o.record.shortfall).iter().sum::<f64>() / n,
        mean_jumps: col(&|o| o.jumps as f64).iter().sum::<f64>() / n,
    };
    let baselines = BASELINES
        .iter()
        .enumerate()
        .map(|(b, name)| StrategyStats {
            name: (*name).into(),
            j1: Summary::new(&col(&|o| o.baselines[b].0), &x_t, x_mean),
            j: Summary::new(&col(&|o| o.baselines[b].1), &x_t, x_mean),
            j0_smoothed: None,
            mean_shortfall: col(&|o| o.baselines[b].2).iter().sum::<f64>() / n,
            mean_jumps: col(&|o| o.baselines[b].3 as f64).iter().sum::<f64>() / n,
        })
        .collect();
    if src.extrapolated() {
        log::warn!("some rollout states left the solved grid");
    }
    Ok(RolloutReport {
        config: *cfg,
        value: field.interpolate(0.0, params.x0, 0.0, params.q0),
        tolerance: field.scheme().tolerance,
        optimal,
        baselines,
        paths: outcomes.iter().map(|o| o.record).collect(),
    })
}
