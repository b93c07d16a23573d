//! Jump truncation and ramp smoothing of a two-jump strategy: both
//! approximations converge to the cost of the original strategy.

use lob_exec::verification::ladder::{approximation_ladder, LadderConfig};
use lob_exec::{MarketParams, PenaltyModel, Result, UtilityModel};

fn main() -> Result<()> {
    let cfg = LadderConfig { n_paths: 1000, ..LadderConfig::default() };
    let r = approximation_ladder(&UtilityModel::default(), &PenaltyModel::default(), &MarketParams::default(), &cfg)?;
    println!("J1(pi) = {:.4} ± {:.4}", r.base_j1.mean, r.base_j1.stderr);
    println!("truncation, J1(pi^m) - J1(pi):");
    for rung in &r.truncation {
        println!("  m = {:>2}: {:+.6} ± {:.6}", rung.parameter, rung.difference.mean, rung.difference.stderr);
    }
    println!("smoothing, J0(pi^delta) - J1(pi):");
    for rung in &r.smoothing {
        println!("  delta = {:.3}: {:+.6} ± {:.6}", rung.parameter, rung.difference.mean, rung.difference.stderr);
    }
    println!(
        "decreasing: truncation {}, smoothing {}; final relative gap {:.2e}",
        r.truncation_decreasing, r.smoothing_decreasing, r.final_smoothing_relative
    );
    Ok(())
}
