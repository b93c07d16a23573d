//! Book identities checked by quadrature in price space.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::lob::UtilityModel;
use crate::market::stream_rng;

/// One random exponential-family book.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BookDraw {
    pub a: f64,
    pub gamma: f64,
    pub x: f64,
    pub q: f64,
}

/// Draws with `γq ≤ 6`, so the book's price range is resolvable in `f64`.
pub fn random_books(n: usize, seed: u64) -> Vec<BookDraw> {
    let mut rng = stream_rng(seed);
    (0..n)
        .map(|_| {
            let q: f64 = rng.random_range(0.5..30.0);
            BookDraw {
                a: rng.random_range(0.2..5.0),
                gamma: rng.random_range(0.01..(6.0 / q).min(1.0)),
                x: rng.random_range(5.0..500.0),
                q,
            }
        })
        .collect()
}

/// `|∫_{p(0)}^{p(q)} μ(y) dy − q| / q`.
pub fn normalization_error(d: &BookDraw) -> Result<f64> {
    let u = UtilityModel::exponential(d.a, d.gamma)?;
    let snap = u.snapshot(d.x, d.q)?;
    Ok((snap.volume_below_depth(d.q)? - d.q).abs() / d.q)
}

/// `|∫_{p(0)}^{p(α)} y μ(y) dy − α U(x, q − α)| / (α U)`.
pub fn cost_identity_error(u: &UtilityModel, x: f64, q: f64, alpha: f64) -> Result<f64> {
    let snap = u.snapshot(x, q)?;
    let exact = alpha * u.value(x, q - alpha);
    Ok((snap.cost_by_quadrature(alpha)? - exact).abs() / exact)
}

/// Largest deviation of the linear family's density from `1/(2b)` over
/// `n` depths spread across `[0, q]`.
pub fn block_density_error(a: f64, b: f64, x: f64, q: f64, n: usize) -> Result<f64> {
    let u = UtilityModel::linear(a, b)?;
    let snap = u.snapshot(x, q)?;
    let mut worst: f64 = 0.0;
    for i in 0..n {
        let alpha = q * i as f64 / (n - 1).max(1) as f64;
        worst = worst.max((snap.density_at_depth(alpha)? - 0.5 / b).abs());
    }
    Ok(worst)
}

/// Outcome of the `D ≤ C` scan.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostOrdering {
    /// `max (D − C)` over all draws; must be `≤ 0`.
    pub max_gap: f64,
    /// Draws with `α > 0` where `D = C` (should be none).
    pub ties_at_positive_alpha: usize,
    /// Draws with `α = 0` where `D ≠ C` (should be none).
    pub gaps_at_zero_alpha: usize,
}

/// `D(x, q, α) ≤ C(x, q, α)` on `n` random draws (one in ten at `α = 0`).
pub fn smoothed_below_execution(n: usize, seed: u64) -> Result<CostOrdering> {
    let mut rng = stream_rng(seed);
    let mut out = CostOrdering { max_gap: f64::NEG_INFINITY, ties_at_positive_alpha: 0, gaps_at_zero_alpha: 0 };
    for i in 0..n {
        let u = UtilityModel::exponential(rng.random_range(0.1..5.0), rng.random_range(0.01..1.0))?;
        let x = rng.random_range(1.0..500.0);
        let q = rng.random_range(0.1..50.0);
        let alpha = if i % 10 == 0 { 0.0 } else { rng.random_range(0.0..1.0) * q };
        let snap = u.snapshot(x, q)?;
        let gap = -snap.smoothing_saving(alpha)?;
        out.max_gap = out.max_gap.max(gap);
        if alpha > 0.0 && gap >= 0.0 {
            out.ties_at_positive_alpha += 1;
        }
        if alpha == 0.0 && gap != 0.0 {
            out.gaps_at_zero_alpha += 1;
        }
    }
    Ok(out)
}
