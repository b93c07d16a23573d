//! Value against order-flow intensity when the book starts thin and
//! inflows are purely positive, so more flow helps the buyer.

use lob_exec::market::JumpDistribution;
use lob_exec::qvi::{solve, GridSpec};
use lob_exec::{MarketParams, PenaltyModel, Result, UtilityModel};

fn main() -> Result<()> {
    let (utility, penalty) = (UtilityModel::default(), PenaltyModel::default());
    let base = MarketParams { q0: 4.0, nu: JumpDistribution::new(vec![2.0], vec![1.0])?, ..MarketParams::default() };
    println!("{:>7} {:>12} {:>10}", "lambda", "v0", "premium");
    for lambda in [0.0, 1.0, 2.0, 4.0] {
        let params = MarketParams { lambda, ..base.clone() };
        let field = solve(&GridSpec::default(), &utility, &penalty, &params)?;
        let v0 = field.interpolate(0.0, params.x0, 0.0, params.q0);
        println!("{lambda:>7.1} {v0:>12.4} {:>10.4}", v0 - params.target * params.x0);
    }
    Ok(())
}
