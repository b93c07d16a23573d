//! Shape of the equilibrium book: prices, densities and costs by depth,
//! for the exponential and the block-shaped linear family.

use lob_exec::{Result, UtilityModel};

fn main() -> Result<()> {
    let (x, q) = (100.0, 10.0);
    for (name, u) in [("exponential", UtilityModel::exponential(1.0, 0.1)?), ("linear", UtilityModel::linear(1.0, 0.05)?)] {
        let book = u.snapshot(x, q)?;
        println!("{name} book at x = {x}, q = {q}: best ask {:.4}", book.best_ask());
        println!("{:>6} {:>10} {:>10} {:>12} {:>12} {:>10}", "alpha", "p(alpha)", "mu", "C", "D", "C - D");
        for i in 0..=10 {
            let alpha = q * i as f64 / 10.0;
            println!(
                "{alpha:>6.1} {:>10.4} {:>10.4} {:>12.4} {:>12.4} {:>10.6}",
                book.price_at_depth(alpha)?,
                book.density_at_depth(alpha)?,
                book.execution_cost(alpha)?,
                book.smoothed_cost(alpha)?,
                book.smoothing_saving(alpha)?,
            );
        }
        let top = book.price_at_depth(q)?;
        println!("volume recovered by price-space quadrature: {:.10}\n", book.volume_below_depth(q)?);
        println!("inverse map at p = {top:.4}: depth {:.6}\n", book.depth_at_price(top)?);
    }
    Ok(())
}
