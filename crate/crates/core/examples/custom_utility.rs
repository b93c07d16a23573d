//! A user supplied utility surface. The constructor samples the surface and
//! rejects one whose book density would not be positive.

use lob_exec::{Result, UtilityModel};

fn main() -> Result<()> {
    // U = x + a / (1 + c q): decreasing and convex in q.
    let (a, c) = (2.0, 0.3);
    let u = UtilityModel::custom(
        move |x, q| x + a / (1.0 + c * q),
        move |_, q| -a * c / (1.0 + c * q).powi(2),
        move |_, q| 2.0 * a * c * c / (1.0 + c * q).powi(3),
        500.0,
        50.0,
    )?;
    let book = u.snapshot(100.0, 8.0)?;
    for alpha in [0.0, 2.0, 4.0, 8.0] {
        println!(
            "alpha {alpha:.1}: price {:.4}, density {:.4}, smoothed cost {:.4}",
            book.price_at_depth(alpha)?,
            book.density_at_depth(alpha)?,
            book.smoothed_cost(alpha)?
        );
    }

    // U increasing in q breaks the model and is refused.
    let bad = UtilityModel::custom(|x, q| x + q, |_, _| 1.0, |_, _| 0.0, 500.0, 50.0);
    println!("increasing surface: {}", bad.unwrap_err());
    Ok(())
}
