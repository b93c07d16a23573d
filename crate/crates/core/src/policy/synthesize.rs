use super::region::{inaction_region, ObstacleSource};
use crate::error::Result;
use crate::market::{MarketParams, MarketPath, Strategy};

/// Feedback strategy `π_{t+} = φ(t, π_t, π_t + Q_t)` on the path mesh.
///
/// At every mesh point without an order-flow arrival the holding is moved
/// to the jump map target, capped by the available volume. At arrival
/// points the strategy waits one step so that it never trades together
/// with the flow. No purchase happens at the horizon.
pub fn synthesize<S: ObstacleSource + ?Sized>(src: &S, path: &MarketPath, params: &MarketParams) -> Result<Strategy> {
    let n = path.n_steps();
    let mut q = params.q0;
    let mut pi = 0.0;
    let mut jumps = Vec::new();
    let eps = 1e-12 * params.target.max(1.0);
    for step in 0..n {
        for f in path.flows_at(step) {
            q = (q + f.size).max(0.0);
        }
        if path.has_flow_at(step) || q <= 0.0 || pi >= params.target - eps {
            continue;
        }
        let s = pi + q;
        let region = inaction_region(src, path.time(step), path.x()[step], s);
        let target = region.jump_map(pi).min(s).min(params.target);
        if target > pi + eps {
            let size = target - pi;
            jumps.push((step, size));
            pi = target;
            q -= size;
        }
    }
    Strategy::jumps(0.0, n, path.dt(), jumps)
}
