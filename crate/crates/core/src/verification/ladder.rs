//! Approximation ladder: jump truncation `π^m` and ramp smoothing `π^{M,δ}`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::dpp::MC_BAND;
use crate::error::{Error, Result};
use crate::lob::UtilityModel;
use crate::market::{simulate_steps, stream_seed, CostModel, MarketParams, PenaltyModel, Strategy};
use crate::stats::Estimate;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LadderConfig {
    /// Planned `(time, size)` jumps, snapped to the mesh and made admissible per path.
    pub jumps: Vec<(f64, f64)>,
    pub m_list: Vec<u32>,
    pub deltas: Vec<f64>,
    pub n_paths: usize,
    pub steps: usize,
    pub seed: u64,
}

impl Default for LadderConfig {
    fn default() -> Self {
        LadderConfig {
            jumps: vec![(0.25, 2.0), (0.6, 1.5)],
            m_list: vec![1, 2, 4, 8],
            deltas: vec![0.1, 0.05, 0.025],
            n_paths: 1000,
            steps: 400,
            seed: 41,
        }
    }
}

/// Pathwise difference to `J¹(π)` of one rung.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rung {
    pub parameter: f64,
    pub cost: Estimate,
    pub difference: Estimate,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LadderReport {
    pub base_j1: Estimate,
    /// `J¹(π^m)` for ascending `m`.
    pub truncation: Vec<Rung>,
    /// `J⁰(π^{δ})` for descending `δ`.
    pub smoothing: Vec<Rung>,
    pub truncation_decreasing: bool,
    pub smoothing_decreasing: bool,
    /// `|difference|` of the last smoothing rung relative to `J¹(π)`.
    pub final_smoothing_relative: f64,
}

/// `|d̄_{i+1}| ≤ |d̄_i| + 3·se(d_{i+1} − d_i)` for consecutive rungs.
fn decreasing(samples: &[Vec<f64>]) -> bool {
    samples.windows(2).all(|w| {
        let a = Estimate::from_samples(&w[0]);
        let b = Estimate::from_samples(&w[1]);
        let paired: Vec<f64> = w[1].iter().zip(&w[0]).map(|(y, x)| y - x).collect();
        b.mean.abs() <= a.mean.abs() + MC_BAND * Estimate::from_samples(&paired).stderr
    })
}

pub fn approximation_ladder(
    utility: &UtilityModel,
    penalty: &PenaltyModel,
    params: &MarketParams,
    cfg: &LadderConfig,
) -> Result<LadderReport> {
    if cfg.m_list.windows(2).any(|w| w[1] <= w[0]) || cfg.deltas.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Domain("m must ascend and δ must descend".into()));
    }
    let dt = params.horizon / cfg.steps as f64;
    let plan = Strategy::schedule(0.0, cfg.steps, dt, &cfg.jumps)?;
    let cost = CostModel { utility, penalty, params };
    // per path: J¹(π), J¹(π^m)..., J⁰(π^δ)...
    let rows: Vec<Vec<f64>> = (0..cfg.n_paths as u64)
        .into_par_iter()
        .map(|i| -> Result<Vec<f64>> {
            let path = simulate_steps(params, cfg.steps, stream_seed(cfg.seed, i))?;
            let strat = plan.make_admissible(&path, params)?;
            let mut row = vec![cost.cost_j1(&path, &strat)?];
            for &m in &cfg.m_list {
                row.push(cost.cost_j1(&path, &strat.jump_truncate(m))?);
            }
            for &d in &cfg.deltas {
                row.push(cost.cost_j0(&path, &strat.jump_smooth(d, &path)?)?);
            }
            Ok(row)
        })
        .collect::<Result<_>>()?;
    let column = |c: usize| -> Vec<f64> { rows.iter().map(|r| r[c]).collect() };
    let base = column(0);
    let base_j1 = Estimate::from_samples(&base);
    let diffs = |c: usize| -> Vec<f64> { rows.iter().map(|r| r[c] - r[0]).collect() };
    let rung = |c: usize, parameter: f64| Rung {
        parameter,
        cost: Estimate::from_samples(&column(c)),
        difference: Estimate::from_samples(&diffs(c)),
    };
    let nm = cfg.m_list.len();
    let truncation: Vec<Rung> = cfg.m_list.iter().enumerate().map(|(j, &m)| rung(1 + j, m as f64)).collect();
    let smoothing: Vec<Rung> = cfg.deltas.iter().enumerate().map(|(j, &d)| rung(1 + nm + j, d)).collect();
    let trunc_samples: Vec<Vec<f64>> = (0..nm).map(|j| diffs(1 + j)).collect();
    let smooth_samples: Vec<Vec<f64>> = (0..cfg.deltas.len()).map(|j| diffs(1 + nm + j)).collect();
    let final_smoothing_relative = smoothing.last().map_or(0.0, |r| r.difference.mean.abs() / base_j1.mean.abs());
    Ok(LadderReport {
        base_j1,
        truncation_decreasing: decreasing(&trunc_samples),
        smoothing_decreasing: decreasing(&smooth_samples),
        truncation,
        smoothing,
        final_smoothing_relative,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn continuous_strategy_ladder_is_flat() {
        let params = MarketParams::default().frozen();
        let u = UtilityModel::default();
        let g = PenaltyModel::default();
        let cfg = LadderConfig { jumps: vec![], n_paths: 4, steps: 40, ..LadderConfig::default() };
        let r = approximation_ladder(&u, &g, &params, &cfg).unwrap();
        for rung in r.truncation.iter().chain(&r.smoothing) {
            assert_eq!(rung.difference.mean, 0.0);
        }
    }

    #[test]
    fn frozen_single_jump_ramp_matches_smoothed_cost() {
        let params = MarketParams::default().frozen();
        let u = UtilityModel::default();
        let g = PenaltyModel::default();
        let cfg = LadderConfig { jumps: vec![(0.5, 2.0)], n_paths: 2, steps: 200, ..LadderConfig::default() };
        let r = approximation_ladder(&u, &g, &params, &cfg).unwrap();
        for rung in &r.smoothing {
            assert!(rung.difference.mean.abs() < 1e-9);
        }
        assert!(r.smoothing_decreasing && r.truncation_decreasing);
    }
}
