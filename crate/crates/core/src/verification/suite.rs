use std::time::Instant;

use log::info;
use serde::{Deserialize, Serialize};

use super::density::{block_density_error, cost_identity_error, normalization_error, random_books, smoothed_below_execution};
use super::dpp::{dpp_residual, Candidate};
use super::ladder::{approximation_ladder, LadderConfig};
use super::mini::{oracle_comparison, MiniInstance};
use super::regularity::{monotonicity_scan, residual_check, temporal_stability};
use crate::error::Result;
use crate::lob::UtilityModel;
use crate::market::{MarketParams, PenaltyModel};
use crate::policy::{rollout, RolloutConfig};
use crate::qvi::{solve, GridSpec};

pub const DENSITY_TOL: f64 = 1e-8;
pub const BLOCK_TOL: f64 = 1e-12;
pub const ORACLE_TOL: f64 = 0.05;
pub const ORACLE_MIN_PROBES: usize = 9;
pub const LADDER_FINAL_TOL: f64 = 0.01;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
}

/// One verification record.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub status: Status,
    pub statistic: f64,
    pub tolerance: f64,
    pub detail: String,
    /// Wall time; left out of serialized reports so they stay reproducible.
    #[serde(skip)]
    pub seconds: f64,
}

impl Check {
    fn new(name: &str, pass: bool, statistic: f64, tolerance: f64, detail: String) -> Check {
        Check {
            name: name.into(),
            status: if pass { Status::Pass } else { Status::Fail },
            statistic,
            tolerance,
            detail,
            seconds: 0.0,
        }
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub grid: GridSpec,
    pub n_paths: usize,
    pub seed: u64,
    pub dpp_steps: usize,
    pub rollout_steps: usize,
    pub smooth_delta: f64,
    pub ladder_steps: usize,
    pub temporal_nts: Vec<usize>,
    pub oracle_steps: usize,
    pub oracle_levels: usize,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            grid: GridSpec::default(),
            n_paths: 1000,
            seed: 20_240_601,
            dpp_steps: 100,
            rollout_steps: 200,
            smooth_delta: 0.02,
            ladder_steps: 400,
            temporal_nts: vec![20, 40, 80],
            oracle_steps: 3,
            oracle_levels: 8,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub checks: Vec<Check>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }
}

fn timed<F: FnOnce() -> Result<Check>>(f: F) -> Result<Check> {
    let start = Instant::now();
    let mut c = f()?;
    c.seconds = start.elapsed().as_secs_f64();
    info!("{}: {:?} ({:.3e} vs {:.3e})", c.name, c.status, c.statistic, c.tolerance);
    Ok(c)
}

/// Runs every check against one model; the value field is solved once.
pub fn run_suite(
    utility: &UtilityModel,
    penalty: &PenaltyModel,
    params: &MarketParams,
    cfg: &SuiteConfig,
) -> Result<SuiteReport> {
    let mut checks = Vec::new();
    let seed = cfg.seed;

    checks.push(timed(|| {
        let mut worst: f64 = 0.0;
        for d in random_books(100, seed) {
            worst = worst.max(normalization_error(&d)?);
        }
        Ok(Check::new("density_normalization", worst <= DENSITY_TOL, worst, DENSITY_TOL, "100 random books".into()))
    })?);

    checks.push(timed(|| {
        let u = UtilityModel::default();
        let mut worst: f64 = 0.0;
        for i in 0..20 {
            let q = 0.5 + 29.5 * i as f64 / 19.0;
            for j in 1..=20 {
                worst = worst.max(cost_identity_error(&u, 100.0, q, (q * j as f64 / 20.0).min(q))?);
            }
        }
        Ok(Check::new("cost_identity", worst <= DENSITY_TOL, worst, DENSITY_TOL, "20x20 (q, alpha) grid".into()))
    })?);

    checks.push(timed(|| {
        let worst = block_density_error(1.0, 0.05, 100.0, 19.0, 100)?;
        Ok(Check::new("block_shape", worst <= BLOCK_TOL, worst, BLOCK_TOL, "linear family, 100 depths".into()))
    })?);

    checks.push(timed(|| {
        let r = smoothed_below_execution(1000, seed)?;
        let pass = r.max_gap <= 0.0 && r.ties_at_positive_alpha == 0 && r.gaps_at_zero_alpha == 0;
        Ok(Check::new("smoothed_below_execution", pass, r.max_gap, 0.0, format!("{r:?}")))
    })?);

    checks.push(timed(|| {
        let lc = LadderConfig { n_paths: cfg.n_paths, steps: cfg.ladder_steps, seed, ..LadderConfig::default() };
        let r = approximation_ladder(utility, penalty, params, &lc)?;
        let pass = r.smoothing_decreasing && r.truncation_decreasing && r.final_smoothing_relative <= LADDER_FINAL_TOL;
        let diffs: Vec<String> = r.smoothing.iter().map(|s| format!("{:.4e}", s.difference.mean)).collect();
        Ok(Check::new(
            "approximation_ladder",
            pass,
            r.final_smoothing_relative,
            LADDER_FINAL_TOL,
            format!("smoothing differences {}", diffs.join(", ")),
        ))
    })?);

    let field = solve(&cfg.grid, utility, penalty, params)?;

    checks.push(timed(|| {
        let r = residual_check(&field, utility, params);
        Ok(Check::new(
            "qvi_residual",
            r.passed(),
            r.max_residual.max(-r.min_obstacle),
            r.tolerance,
            format!("{} interior nodes, min K*M = {:.3e}", r.nodes, r.min_obstacle),
        ))
    })?);

    checks.push(timed(|| {
        let r = monotonicity_scan(&field);
        let worst = r.max_violation_x.max(r.max_violation_k).max(r.max_violation_q);
        Ok(Check::new("monotonicity", r.passed(), worst, r.tolerance, format!("{} violations", r.violations)))
    })?);

    checks.push(timed(|| {
        let inst = MiniInstance::from_model(params, utility, penalty, cfg.oracle_steps, cfg.oracle_levels)?;
        let r = oracle_comparison(&inst, &field)?;
        let pass = r.probes.len() >= ORACLE_MIN_PROBES && r.max_relative <= ORACLE_TOL;
        let premium = r.probes.iter().map(|p| p.premium_difference.abs()).fold(0.0, f64::max);
        Ok(Check::new(
            "oracle_equivalence",
            pass,
            r.max_relative,
            ORACLE_TOL,
            format!("{} probes, {} oracle nodes, max premium difference {premium:.4}", r.probes.len(), r.nodes),
        ))
    })?);

    checks.push(timed(|| {
        let r = dpp_residual(&field, utility, penalty, params, 0.0, params.horizon / 2.0, cfg.n_paths, cfg.dpp_steps, seed)?;
        let all_above = r.candidates.iter().all(|c| c.above_value);
        let policy = r.get(Candidate::Policy).expect("policy candidate");
        let gap = (policy.estimate.controlled.mean - r.value).abs();
        Ok(Check::new(
            "dpp_residual",
            all_above && policy.attains_value,
            gap,
            r.tolerance + 3.0 * policy.estimate.controlled.stderr,
            format!(
                "V(0) = {:.4}; {}",
                r.value,
                r.candidates
                    .iter()
                    .map(|c| format!("{:?} {:.4}", c.candidate, c.estimate.controlled.mean))
                    .collect::<Vec<_>>()
                    .join(", ")
            ),
        ))
    })?);

    checks.push(timed(|| {
        let rc = RolloutConfig { n_paths: cfg.n_paths, steps: cfg.rollout_steps, seed, smooth_delta: cfg.smooth_delta };
        let r = rollout(&field, utility, penalty, params, &rc)?;
        let e = r.optimal.j1.controlled;
        let in_band = e.mean >= r.value - r.tolerance && e.mean <= r.value + r.tolerance + 3.0 * e.stderr;
        let beats = ["twap", "terminal"].iter().all(|b| {
            let s = r.baseline(b).expect("baseline present").j1.controlled;
            e.mean <= s.mean + 2.0 * s.stderr
        });
        Ok(Check::new(
            "verification_rollout",
            in_band && beats,
            (e.mean - r.value).abs(),
            r.tolerance,
            format!(
                "J1 = {:.4} ± {:.4}, v = {:.4}; baselines {}",
                e.mean,
                e.stderr,
                r.value,
                r.baselines
                    .iter()
                    .map(|b| format!("{} {:.4}", b.name, b.j1.controlled.mean))
                    .collect::<Vec<_>>()
                    .join(", ")
            ),
        ))
    })?);

    checks.push(timed(|| {
        let r = temporal_stability(&cfg.grid, &cfg.temporal_nts, utility, penalty, params)?;
        Ok(Check::new(
            "temporal_regularity",
            r.passed(),
            r.max_relative_spread,
            super::regularity::TEMPORAL_SPREAD,
            format!("C-hat {:?} for nt {:?}", r.constants, r.nts),
        ))
    })?);

    Ok(SuiteReport { checks })
}
