//! Acceptance criteria, each at its stated tolerance. Every test prints one
//! `PASS`/`FAIL` line; run with `--nocapture` to see them.

use std::sync::OnceLock;
use std::time::{Duration, Instant};

use lob_exec::policy::{rollout, RolloutConfig};
use lob_exec::qvi::{solve, GridSpec, ValueField};
use lob_exec::verification::density::{
    block_density_error, cost_identity_error, normalization_error, random_books, smoothed_below_execution,
};
use lob_exec::verification::dpp::{dpp_residual, Candidate};
use lob_exec::verification::ladder::{approximation_ladder, LadderConfig};
use lob_exec::verification::mini::{oracle_comparison, MiniInstance};
use lob_exec::verification::regularity::{monotonicity_scan, residual_check, temporal_stability};
use lob_exec::{MarketParams, PenaltyModel, UtilityModel};

const SEED: u64 = 20_240_601;
const PATHS: usize = 1000;

const NORMALIZATION_TOL: f64 = 1e-8;
const COST_IDENTITY_TOL: f64 = 1e-8;
const BLOCK_TOL: f64 = 1e-12;
const LADDER_FINAL_TOL: f64 = 0.01;
const MONOTONE_RELATIVE: f64 = 1e-8;
const ORACLE_TOL: f64 = 0.05;
const ORACLE_MIN_PROBES: usize = 9;
const MC_BAND: f64 = 3.0;
const BASELINE_BAND: f64 = 2.0;
const TEMPORAL_SPREAD: f64 = 0.25;

fn model() -> (UtilityModel, PenaltyModel, MarketParams) {
    (UtilityModel::default(), PenaltyModel::default(), MarketParams::default())
}

/// The default-grid solve, shared by the criteria that need it.
fn field() -> &'static (ValueField, Duration) {
    static FIELD: OnceLock<(ValueField, Duration)> = OnceLock::new();
    FIELD.get_or_init(|| {
        let (u, g, p) = model();
        let start = Instant::now();
        let f = solve(&GridSpec { nt: 20, nx: 30, nk: 30, ..GridSpec::default() }, &u, &g, &p).unwrap();
        (f, start.elapsed())
    })
}

fn report(id: u32, name: &str, pass: bool, statistic: f64, tolerance: f64, elapsed: Duration, limit: Option<Duration>) {
    let in_time = limit.is_none_or(|l| elapsed <= l);
    let status = if pass && in_time { "PASS" } else { "FAIL" };
    let limit = limit.map_or(String::new(), |l| format!(" / limit {:.0?}", l));
    println!("[{status}] {id:>2} {name}: statistic {statistic:.4e}, tolerance {tolerance:.4e}, {elapsed:.2?}{limit}");
    assert!(pass, "criterion {id} ({name}) failed: {statistic:e} vs {tolerance:e}");
    assert!(in_time, "criterion {id} ({name}) exceeded its time limit");
}

#[test]
fn c01_density_normalization() {
    let start = Instant::now();
    let books = random_books(100, SEED);
    let worst = books.iter().map(|d| normalization_error(d).unwrap()).fold(0.0, f64::max);
    report(1, "density normalization", worst <= NORMALIZATION_TOL, worst, NORMALIZATION_TOL, start.elapsed(), Some(Duration::from_secs(5)));
}

#[test]
fn c02_cost_identity() {
    let start = Instant::now();
    let u = UtilityModel::default();
    let mut worst: f64 = 0.0;
    for i in 0..20 {
        let q = 0.5 + 29.5 * i as f64 / 19.0;
        for j in 1..=20 {
            let alpha = (q * j as f64 / 20.0).min(q);
            worst = worst.max(cost_identity_error(&u, 100.0, q, alpha).unwrap());
        }
    }
    report(2, "equilibrium cost identity", worst <= COST_IDENTITY_TOL, worst, COST_IDENTITY_TOL, start.elapsed(), Some(Duration::from_secs(5)));
}

#[test]
fn c03_block_shape() {
    let start = Instant::now();
    let worst = block_density_error(1.0, 0.05, 100.0, 19.0, 100).unwrap();
    report(3, "block-shape degeneracy", worst <= BLOCK_TOL, worst, BLOCK_TOL, start.elapsed(), None);
}

#[test]
fn c04_smoothed_below_execution() {
    let start = Instant::now();
    let r = smoothed_below_execution(1000, SEED).unwrap();
    let pass = r.max_gap <= 0.0 && r.ties_at_positive_alpha == 0 && r.gaps_at_zero_alpha == 0;
    report(4, "D <= C, equality iff alpha = 0", pass, r.max_gap, 0.0, start.elapsed(), None);
}

#[test]
fn c05_approximation_ladder() {
    let start = Instant::now();
    let (u, g, p) = model();
    let cfg = LadderConfig { n_paths: PATHS, seed: SEED, deltas: vec![0.1, 0.05, 0.025], ..LadderConfig::default() };
    assert_eq!(cfg.jumps.len(), 2);
    let r = approximation_ladder(&u, &g, &p, &cfg).unwrap();
    let pass = r.smoothing_decreasing && r.final_smoothing_relative <= LADDER_FINAL_TOL;
    report(5, "approximation ladder", pass, r.final_smoothing_relative, LADDER_FINAL_TOL, start.elapsed(), Some(Duration::from_secs(60)));
}

#[test]
fn c06_qvi_residual() {
    let (u, _, p) = model();
    let (f, solve_time) = field();
    let start = Instant::now();
    let r = residual_check(f, &u, &p);
    let pass = r.max_residual <= r.tolerance && r.min_obstacle >= -r.tolerance;
    let stat = r.max_residual.max(-r.min_obstacle);
    report(6, "QVI residual", pass, stat, r.tolerance, *solve_time + start.elapsed(), Some(Duration::from_secs(300)));
}

#[test]
fn c07_monotonicity() {
    let (f, _) = field();
    let start = Instant::now();
    let r = monotonicity_scan(f);
    let tol = MONOTONE_RELATIVE * f.value_scale();
    let worst = r.max_violation_x.max(r.max_violation_k).max(r.max_violation_q);
    report(7, "monotonicity of V", worst <= tol && r.violations == 0, worst, tol, start.elapsed(), None);
}

#[test]
fn c08_oracle_equivalence() {
    let (u, g, p) = model();
    let (f, _) = field();
    let start = Instant::now();
    let inst = MiniInstance::from_model(&p, &u, &g, 3, 8).unwrap();
    let r = oracle_comparison(&inst, f).unwrap();
    let interior = r.probes.iter().filter(|pr| pr.t < p.horizon).count();
    let pass = interior >= ORACLE_MIN_PROBES && r.max_relative <= ORACLE_TOL;
    report(8, "oracle equivalence", pass, r.max_relative, ORACLE_TOL, start.elapsed(), Some(Duration::from_secs(120)));
}

#[test]
fn c09_dpp_residual() {
    let (u, g, p) = model();
    let (f, _) = field();
    let start = Instant::now();
    let r = dpp_residual(f, &u, &g, &p, 0.0, p.horizon / 2.0, PATHS, 100, SEED).unwrap();
    let above = r.candidates.iter().all(|c| c.estimate.controlled.mean >= r.value - r.tolerance - MC_BAND * c.estimate.controlled.stderr);
    let policy = r.get(Candidate::Policy).unwrap().estimate.controlled;
    let gap = (policy.mean - r.value).abs();
    let band = r.tolerance + MC_BAND * policy.stderr;
    report(9, "DPP residual", above && gap <= band, gap, band, start.elapsed(), Some(Duration::from_secs(120)));
}

#[test]
fn c10_verification_rollout() {
    let (u, g, p) = model();
    let (f, _) = field();
    let start = Instant::now();
    let cfg = RolloutConfig { n_paths: PATHS, seed: SEED, ..RolloutConfig::default() };
    let r = rollout(f, &u, &g, &p, &cfg).unwrap();
    let e = r.optimal.j1.controlled;
    let in_band = e.mean >= r.value - r.tolerance && e.mean <= r.value + r.tolerance + MC_BAND * e.stderr;
    let beats = ["twap", "terminal"].iter().all(|b| {
        let s = r.baseline(b).unwrap().j1.controlled;
        e.mean <= s.mean + BASELINE_BAND * s.stderr
    });
    report(10, "verification-theorem rollout", in_band && beats, (e.mean - r.value).abs(), r.tolerance, start.elapsed(), Some(Duration::from_secs(120)));
}

#[test]
fn c11_temporal_regularity() {
    let (u, g, p) = model();
    let start = Instant::now();
    let r = temporal_stability(&GridSpec::default(), &[20, 40, 80], &u, &g, &p).unwrap();
    report(11, "temporal regularity", r.max_relative_spread <= TEMPORAL_SPREAD, r.max_relative_spread, TEMPORAL_SPREAD, start.elapsed(), None);
}
