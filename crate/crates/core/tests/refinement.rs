use lob_exec::qvi::{solve, GridSpec};
use lob_exec::{MarketParams, PenaltyModel, UtilityModel};

/// Halving every spacing should roughly halve the change in `v(0, x₀, 0, q₀)`.
#[test]
fn value_converges_under_refinement() {
    let (u, g) = (UtilityModel::default(), PenaltyModel::default());
    for q0 in [4.0, 10.0] {
        let p = MarketParams { q0, ..MarketParams::default() };
        let v: Vec<f64> = [(10, 15, 15), (20, 30, 30), (40, 60, 60)]
            .iter()
            .map(|&(nt, nx, nk)| {
                let f = solve(&GridSpec { nt, nx, nk, ..GridSpec::default() }, &u, &g, &p).unwrap();
                f.interpolate(0.0, p.x0, 0.0, p.q0)
            })
            .collect();
        let (d1, d2) = ((v[1] - v[0]).abs(), (v[2] - v[1]).abs());
        assert!(d2 < 0.75 * d1, "q0 = {q0}: {v:?}");
        // buying all of K at once is admissible, so it bounds the value
        let bought = p.target.min(p.q0);
        let immediate = u.snapshot(p.x0, p.q0).unwrap().smoothed_cost(bought).unwrap() + g.value(&u, p.x0, p.target - bought);
        assert!(v[2] <= immediate + 1e-9, "q0 = {q0}: {} > {immediate}", v[2]);
    }
}
