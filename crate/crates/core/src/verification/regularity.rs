//! Scans of a solved field: QVI residual, monotonicity and regularity.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::lob::UtilityModel;
use crate::market::{MarketParams, PenaltyModel};
use crate::qvi::{solve, GridSpec, Operator, ValueField};

/// Monotonicity violations are measured against `MONOTONE_RELATIVE · max|v|`.
pub const MONOTONE_RELATIVE: f64 = 1e-8;
/// Allowed relative spread of the fitted temporal constant.
pub const TEMPORAL_SPREAD: f64 = 0.25;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    /// `max |min(T·ℒ[v], K·ℳ[v])|` over interior nodes before the horizon.
    pub max_residual: f64,
    /// `min K·ℳ[v]` over nodes with `k < K`, `q > 0`, before the horizon.
    pub min_obstacle: f64,
    pub tolerance: f64,
    pub nodes: usize,
}

impl ResidualReport {
    pub fn passed(&self) -> bool {
        self.max_residual <= self.tolerance && self.min_obstacle >= -self.tolerance
    }
}

/// Both operators are scaled to value units (`ℒ` by `T`, `ℳ` by `K`) and
/// compared with the scheme tolerance. Interior means away from the price
/// boundaries and from `q ∈ {0, q_max}`; the terminal slice is excluded
/// because the penalty is not a fixed point of the obstacle.
pub fn residual_check(field: &ValueField, utility: &UtilityModel, params: &MarketParams) -> ResidualReport {
    let g = *field.grid();
    let op = Operator::new(&g, params, utility);
    let nt = g.t.n - 1;
    let (t_scale, k_scale) = (params.horizon, params.target.max(f64::MIN_POSITIVE));
    let per_slice: Vec<(f64, f64, usize)> = (0..nt)
        .into_par_iter()
        .map(|n| {
            let (mut worst, mut lowest, mut count) = (0.0f64, f64::INFINITY, 0usize);
            for i in 0..g.x.n {
                for k in 0..g.k.n.saturating_sub(1) {
                    for l in 1..g.q.n {
                        let m = op.apply_m(field, n, i, k, l) * k_scale;
                        lowest = lowest.min(m);
                        if i == 0 || i + 1 == g.x.n || l + 1 == g.q.n {
                            continue;
                        }
                        let lv = op.apply_l(field, n, i, k, l) * t_scale;
                        worst = worst.max(lv.min(m).abs());
                        count += 1;
                    }
                }
            }
            (worst, lowest, count)
        })
        .collect();
    ResidualReport {
        max_residual: per_slice.iter().map(|r| r.0).fold(0.0, f64::max),
        min_obstacle: per_slice.iter().map(|r| r.1).fold(f64::INFINITY, f64::min),
        tolerance: field.scheme().tolerance,
        nodes: per_slice.iter().map(|r| r.2).sum(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityReport {
    pub scale: f64,
    pub tolerance: f64,
    /// Largest decrease of `v` between neighbours in `x`.
    pub max_violation_x: f64,
    /// Largest increase in `k`.
    pub max_violation_k: f64,
    /// Largest increase in `q`.
    pub max_violation_q: f64,
    pub violations: usize,
}

impl MonotonicityReport {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

/// Checks `v` non-decreasing in `x` and non-increasing in `k` and `q`
/// across every pair of adjacent nodes.
pub fn monotonicity_scan(field: &ValueField) -> MonotonicityReport {
    let g = *field.grid();
    let scale = field.value_scale();
    let tol = MONOTONE_RELATIVE * scale;
    let per_slice: Vec<[f64; 4]> = (0..g.t.n)
        .into_par_iter()
        .map(|n| {
            let mut r = [0.0f64; 4];
            let mut note = |slot: usize, bad: f64| {
                r[slot] = r[slot].max(bad);
                if bad > tol {
                    r[3] += 1.0;
                }
            };
            for i in 0..g.x.n {
                for k in 0..g.k.n {
                    for l in 0..g.q.n {
                        let v = field.get(n, i, k, l);
                        if i + 1 < g.x.n {
                            note(0, v - field.get(n, i + 1, k, l));
                        }
                        if k + 1 < g.k.n {
                            note(1, field.get(n, i, k + 1, l) - v);
                        }
                        if l + 1 < g.q.n {
                            note(2, field.get(n, i, k, l + 1) - v);
                        }
                    }
                }
            }
            r
        })
        .collect();
    let max = |s: usize| per_slice.iter().map(|r| r[s]).fold(0.0, f64::max);
    MonotonicityReport {
        scale,
        tolerance: tol,
        max_violation_x: max(0),
        max_violation_k: max(1),
        max_violation_q: max(2),
        violations: per_slice.iter().map(|r| r[3]).sum::<f64>() as usize,
    }
}

/// Time pairs used to fit the temporal constant, as fractions of `T`.
/// The horizon is left out: the value jumps there because buying just
/// before `T` is cheaper than the terminal penalty.
pub const PROBE_PAIRS: [(f64, f64); 3] = [(0.0, 0.25), (0.0, 0.5), (0.25, 0.5)];

/// `Ĉ = max |v(t₂) − v(t₁)| / ((1 + x) √(t₂ − t₁))` over the probe pairs
/// and every spatial node.
pub fn temporal_constant(field: &ValueField) -> f64 {
    let g = *field.grid();
    let horizon = g.t.max();
    let mut best: f64 = 0.0;
    for &(a, b) in &PROBE_PAIRS {
        let (t1, t2) = (a * horizon, b * horizon);
        let root = (t2 - t1).sqrt();
        for i in 0..g.x.n {
            let x = g.x.value(i);
            for k in 0..g.k.n {
                for l in 0..g.q.n {
                    let (kv, qv) = (g.k.value(k), g.q.value(l));
                    let d = (field.interpolate(t2, x, kv, qv) - field.interpolate(t1, x, kv, qv)).abs();
                    best = best.max(d / ((1.0 + x.abs()) * root));
                }
            }
        }
    }
    best
}

/// Largest difference quotients in `x`, `k` and `q`.
pub fn spatial_quotients(field: &ValueField) -> [f64; 3] {
    let g = *field.grid();
    let mut out = [0.0f64; 3];
    for n in 0..g.t.n {
        for i in 0..g.x.n {
            for k in 0..g.k.n {
                for l in 0..g.q.n {
                    let v = field.get(n, i, k, l);
                    if i + 1 < g.x.n {
                        out[0] = out[0].max((field.get(n, i + 1, k, l) - v).abs() / g.x.step);
                    }
                    if k + 1 < g.k.n {
                        out[1] = out[1].max((field.get(n, i, k + 1, l) - v).abs() / g.k.step);
                    }
                    if l + 1 < g.q.n {
                        out[2] = out[2].max((field.get(n, i, k, l + 1) - v).abs() / g.q.step);
                    }
                }
            }
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TemporalReport {
    pub nts: Vec<usize>,
    pub constants: Vec<f64>,
    /// `max |Ĉ_i / Ĉ_finest − 1|`.
    pub max_relative_spread: f64,
}

impl TemporalReport {
    pub fn passed(&self) -> bool {
        self.max_relative_spread <= TEMPORAL_SPREAD
    }
}

/// Refits `Ĉ` for each `nt` with the spatial grid held fixed.
pub fn temporal_stability(
    base: &GridSpec,
    nts: &[usize],
    utility: &UtilityModel,
    penalty: &PenaltyModel,
    params: &MarketParams,
) -> Result<TemporalReport> {
    let mut constants = Vec::with_capacity(nts.len());
    for &nt in nts {
        let spec = GridSpec { nt, substeps: None, ..base.clone() };
        let field = solve(&spec, utility, penalty, params)?;
        constants.push(temporal_constant(&field));
    }
    let finest = *constants.last().unwrap_or(&0.0);
    let max_relative_spread = constants.iter().map(|c| (c / finest - 1.0).abs()).fold(0.0, f64::max);
    Ok(TemporalReport { nts: nts.to_vec(), constants, max_relative_spread })
}
