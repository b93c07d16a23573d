use log::{debug, info};
use rayon::prelude::*;

use super::field::{SchemeInfo, ValueField};
use super::grid::{Grid, GridSpec};
use super::operators::Operator;
use crate::error::{Error, Result};
use crate::lob::UtilityModel;
use crate::market::{MarketParams, PenaltyModel};

/// Relative slack allowed in the post-projection fixed-point check.
const PROJECTION_SLACK: f64 = 1e-9;

/// `K·max_x (U(x,0) − x) + η·K²` over the price nodes.
pub fn premium_scale(grid: &Grid, utility: &UtilityModel, penalty: &PenaltyModel, target: f64) -> f64 {
    let spread = grid.x.values().map(|x| utility.value(x, 0.0) - x).fold(0.0, f64::max);
    target * spread + penalty.eta * target * target
}

/// Solves the QVI on the grid described by `spec`, honouring `spec.substeps`.
pub fn solve(spec: &GridSpec, utility: &UtilityModel, penalty: &PenaltyModel, params: &MarketParams) -> Result<ValueField> {
    let grid = Grid::build(spec, params)?;
    solve_qvi_with(&grid, utility, penalty, params, spec.substeps)
}

/// Solves the QVI with automatically chosen sub-steps.
pub fn solve_qvi(grid: &Grid, utility: &UtilityModel, penalty: &PenaltyModel, params: &MarketParams) -> Result<ValueField> {
    solve_qvi_with(grid, utility, penalty, params, None)
}

/// Backward sweep: terminal slice `g(x, K − k)`, then per sub-step an
/// explicit generator update followed by the obstacle projection
/// `v(k, q) ← min(v(k, q), U(x, q)·Δ + v(k + Δ, q − Δ))`,
/// taken from `k = K` downwards so one pass reaches the fixed point.
/// `v(·, K, ·) = 0` and nodes with `q = 0` are never projected.
pub fn solve_qvi_with(
    grid: &Grid,
    utility: &UtilityModel,
    penalty: &PenaltyModel,
    params: &MarketParams,
    substeps: Option<usize>,
) -> Result<ValueField> {
    params.validate()?;
    let op = Operator::new(grid, params, utility);
    let dt = grid.t.step;
    let nt = grid.t.n - 1;

    // Worst rate over every time the generator is evaluated at.
    let rate_at = |n: usize, s: usize, subs: usize| op.max_rate(grid.t.value(n + 1) - s as f64 * dt / subs as f64);
    let coarse_rate = (0..nt).map(|n| rate_at(n, 0, 1)).fold(0.0, f64::max);
    let subs = match substeps {
        Some(0) => return Err(Error::config("grid.substeps", "must be at least 1")),
        Some(s) => s,
        None => ((dt * coarse_rate) - 1e-12).ceil().max(1.0) as usize,
    };
    let max_rate = (0..nt)
        .flat_map(|n| (0..subs).map(move |s| (n, s)))
        .map(|(n, s)| rate_at(n, s, subs))
        .fold(coarse_rate, f64::max);
    let h = dt / subs as f64;
    let cfl = h * max_rate;
    if cfl > 1.0 + 1e-12 {
        return Err(Error::config(
            "grid.nt",
            format!(
                "explicit step Δt/substeps = {h:.4e} violates the stability bound \
                 Δt/substeps · max(σ²/Δx² + |b|/Δx + λ) ≤ 1 (ratio {cfl:.3}); \
                 need Δt/substeps ≤ {:.4e}",
                1.0 / max_rate
            ),
        ));
    }

    let mesh = grid.mesh_measure();
    let premium = premium_scale(grid, utility, penalty, params.target);
    let scheme = SchemeInfo {
        substeps: subs,
        substep: h,
        cfl_ratio: cfl,
        mesh_measure: mesh,
        premium_scale: premium,
        tolerance: mesh * premium,
    };
    info!(
        "solving QVI on {}x{}x{}x{} nodes, {} sub-steps of {:.3e} (CFL {:.3})",
        grid.t.n, grid.x.n, grid.k.n, grid.q.n, subs, h, cfl
    );

    let len = grid.slice_len();
    let block = grid.k.n * grid.q.n;
    let nk = grid.k.n;
    let nq = grid.q.n;
    let delta = grid.delta();
    // U(x_i, q_l)·Δ, the cost of buying one k-step at (x_i, q_l)
    let step_cost: Vec<f64> = (0..grid.x.n)
        .flat_map(|i| (0..nq).map(move |l| (i, l)))
        .map(|(i, l)| utility.value(grid.x.value(i), grid.q.value(l)) * delta)
        .collect();

    let mut data = vec![0.0; grid.len()];
    {
        let terminal = &mut data[nt * len..];
        for i in 0..grid.x.n {
            let x = grid.x.value(i);
            for k in 0..nk {
                let g = penalty.value(utility, x, params.target - grid.k.value(k));
                let g = if k + 1 == nk && params.target > 0.0 { 0.0 } else { g };
                for l in 0..nq {
                    terminal[grid.offset(i, k, l)] = g;
                }
            }
        }
    }

    let mut cur = data[nt * len..].to_vec();
    let mut next = vec![0.0; len];
    for n in (0..nt).rev() {
        for s in 0..subs {
            let t = grid.t.value(n + 1) - s as f64 * h;
            op.explicit_step(&cur, t, h, &mut next);
            next.par_chunks_mut(block).enumerate().try_for_each(|(i, out)| {
                project(out, &step_cost[i * nq..(i + 1) * nq], nk, nq, params.target > 0.0)
            })
            .map_err(|message| Error::Solver { slice: n, message })?;
            std::mem::swap(&mut cur, &mut next);
        }
        data[n * len..(n + 1) * len].copy_from_slice(&cur);
        debug!("slice {n} done, value range [{:.4}, {:.4}]", min_of(&cur), max_of(&cur));
    }
    ValueField::new(*grid, data, scheme)
}

/// Obstacle projection for one price node's `(k, q)` block, followed by
/// the fixed-point and finiteness check.
fn project(v: &mut [f64], step_cost: &[f64], nk: usize, nq: usize, has_top: bool) -> std::result::Result<(), String> {
    if has_top {
        v[(nk - 1) * nq..].fill(0.0);
    }
    for k in (0..nk.saturating_sub(1)).rev() {
        let (lower, upper) = v.split_at_mut((k + 1) * nq);
        let row = &mut lower[k * nq..];
        let above = &upper[..nq];
        for l in 1..nq {
            let cand = step_cost[l] + above[l - 1];
            if cand < row[l] {
                row[l] = cand;
            }
        }
    }
    for k in 0..nk {
        for l in 0..nq {
            let here = v[k * nq + l];
            if !here.is_finite() {
                return Err(format!("non-finite value at (k, q) node ({k}, {l})"));
            }
            if k + 1 < nk && l >= 1 {
                let cand = step_cost[l] + v[(k + 1) * nq + l - 1];
                if here > cand + PROJECTION_SLACK * (1.0 + cand.abs()) {
                    return Err(format!("obstacle projection not at a fixed point at (k, q) node ({k}, {l})"));
                }
            }
        }
    }
    Ok(())
}

fn min_of(v: &[f64]) -> f64 {
    v.iter().copied().fold(f64::INFINITY, f64::min)
}

fn max_of(v: &[f64]) -> f64 {
    v.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}
