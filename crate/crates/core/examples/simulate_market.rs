//! Simulated price and order-flow paths, and the realized cost of simple
//! strategies on them.

use lob_exec::market::{evolve_inventory, simulate_ensemble, simulate_steps, stream_seed, CostModel};
use lob_exec::policy::greedy_strategy;
use lob_exec::stats::Estimate;
use lob_exec::{MarketParams, PenaltyModel, Result, Strategy, UtilityModel};

fn main() -> Result<()> {
    let params = MarketParams::default();
    let (utility, penalty) = (UtilityModel::default(), PenaltyModel::default());
    let cost = CostModel { utility: &utility, penalty: &penalty, params: &params };
    let steps = 200;
    let dt = params.horizon / steps as f64;

    let path = simulate_steps(&params, steps, stream_seed(7, 0))?;
    println!("one path: X_T = {:.4}, {} order-flow arrivals", path.terminal_x(), path.flows().len());
    for f in path.flows() {
        println!("  t = {:.3}: {:+.1} shares", f.time, f.size);
    }
    let twap = Strategy::twap(0.0, params.target, steps, dt).make_admissible(&path, &params)?;
    let trace = evolve_inventory(&path, &twap, &params)?;
    println!("TWAP holds {:.3} at the horizon; book {:.3}", trace.pi[steps], trace.q[steps]);

    let paths = simulate_ensemble(&params, steps, 7, 2000)?;
    let x_t: Vec<f64> = paths.iter().map(|p| p.terminal_x()).collect();
    println!("mean X_T over 2000 paths: {:.3} (x0 = {})", Estimate::from_samples(&x_t).mean, params.x0);

    for name in ["twap", "greedy", "terminal"] {
        let mut j1 = Vec::new();
        for p in &paths {
            let s = match name {
                "twap" => Strategy::twap(0.0, params.target, steps, dt).make_admissible(p, &params)?,
                "greedy" => greedy_strategy(p, &params)?,
                _ => Strategy::idle(0.0, steps, dt),
            };
            j1.push(cost.cost_j1(p, &s)?);
        }
        let e = Estimate::from_samples(&j1);
        println!("{name:>8}: J1 = {:.4} ± {:.4}", e.mean, e.stderr);
    }
    Ok(())
}
