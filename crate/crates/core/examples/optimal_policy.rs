//! Inaction regions and jump map from a solved field, a synthesized
//! strategy on one path, and the rollout against baselines.

use lob_exec::market::{simulate_steps, CostModel};
use lob_exec::policy::{inaction_region, rollout, synthesize, FieldObstacle, RolloutConfig};
use lob_exec::qvi::{solve, GridSpec};
use lob_exec::{MarketParams, PenaltyModel, Result, UtilityModel};

fn main() -> Result<()> {
    let params = MarketParams::default();
    let (utility, penalty) = (UtilityModel::default(), PenaltyModel::default());
    let field = solve(&GridSpec::default(), &utility, &penalty, &params)?;
    let src = FieldObstacle::new(&field, &utility, &params);

    for s in [10.0, 5.5, 3.0] {
        let r = inaction_region(&src, 0.0, params.x0, s);
        let spans: Vec<String> = r.intervals.iter().map(|i| format!("[{:.2}, {:.2})", i.start, i.end)).collect();
        println!("s = {s}: inaction {} ; phi(0) = {:.3}", if spans.is_empty() { "none".into() } else { spans.join(" ") }, r.jump_map(0.0));
    }

    let path = simulate_steps(&params, 200, 11)?;
    let star = synthesize(&src, &path, &params)?;
    for (n, size) in star.jump_list() {
        println!("buy {size:.3} at t = {:.3}", path.time(*n));
    }
    let cost = CostModel { utility: &utility, penalty: &penalty, params: &params };
    println!("J1 on this path: {:.4}", cost.cost_j1(&path, &star)?);

    let r = rollout(&field, &utility, &penalty, &params, &RolloutConfig::default())?;
    let e = r.optimal.j1.controlled;
    println!("rollout: J1 = {:.4} ± {:.4}, v = {:.4} (tol {:.3})", e.mean, e.stderr, r.value, r.tolerance);
    for b in &r.baselines {
        println!("  {:>8}: {:.4}", b.name, b.j1.controlled.mean);
    }
    Ok(())
}
