//! Solve the QVI on the default grid and read values off the field.

use lob_exec::qvi::{solve, GridSpec, ValueField};
use lob_exec::{MarketParams, PenaltyModel, Result, UtilityModel};

fn main() -> Result<()> {
    let params = MarketParams::default();
    let (utility, penalty) = (UtilityModel::default(), PenaltyModel::default());
    let start = std::time::Instant::now();
    let field = solve(&GridSpec::default(), &utility, &penalty, &params)?;
    let g = field.grid();
    let s = field.scheme();
    println!(
        "grid {} x {} x {} x {} in {:.2?}; {} sub-steps, CFL ratio {:.3}, tolerance {:.3}",
        g.t.n, g.x.n, g.k.n, g.q.n, start.elapsed(), s.substeps, s.cfl_ratio, s.tolerance
    );
    let v0 = field.interpolate(0.0, params.x0, 0.0, params.q0);
    let immediate = utility.snapshot(params.x0, params.q0)?.smoothed_cost(params.target)?;
    println!("v(0, x0, 0, q0) = {v0:.4}; buying everything at once costs {immediate:.4}");
    for k in [0.0, 2.5, 5.0] {
        println!("  k = {k}: v = {:.4}", field.interpolate(0.0, params.x0, k, params.q0));
    }

    let mut bytes = Vec::new();
    field.write_binary(&mut bytes)?;
    let back = ValueField::read_binary(bytes.as_slice())?;
    println!("binary round trip: {} bytes, identical = {}", bytes.len(), back.data() == field.data());

    // An explicit step that is too long for the mesh is refused.
    let coarse = GridSpec { nt: 2, substeps: Some(1), ..GridSpec::default() };
    println!("{}", solve(&coarse, &utility, &penalty, &params).unwrap_err());
    Ok(())
}
