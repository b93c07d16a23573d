use lob_exec::market::{simulate_ensemble, simulate_steps, Coefficients, JumpDistribution};
use lob_exec::stats::Estimate;
use lob_exec::MarketParams;

#[test]
fn geometric_drift_matches_its_mean() {
    let params = MarketParams { coefficients: Coefficients::Geometric { mu: 0.05, sigma: 0.2 }, ..MarketParams::default() };
    let steps = 50;
    let paths = simulate_ensemble(&params, steps, 2024, 100_000).unwrap();
    let x_t: Vec<f64> = paths.iter().map(|p| p.terminal_x()).collect();
    let e = Estimate::from_samples(&x_t);
    let exact = params.x0 * (0.05f64 * params.horizon).exp();
    let euler = params.coefficients.euler_mean(params.x0, params.horizon, steps).unwrap();
    assert!((euler - exact).abs() < 0.01);
    assert!((e.mean - euler).abs() <= 3.0 * e.stderr, "{} ± {} vs {euler}", e.mean, e.stderr);
    // log-variance of a geometric motion is σ²T
    let logs: Vec<f64> = x_t.iter().map(|x| (x / params.x0).ln()).collect();
    let m = Estimate::from_samples(&logs).mean;
    let var = logs.iter().map(|l| (l - m).powi(2)).sum::<f64>() / (logs.len() - 1) as f64;
    assert!((var - 0.04).abs() < 0.002, "{var}");
}

#[test]
fn order_flow_has_poisson_counts_and_the_jump_law() {
    let params = MarketParams {
        lambda: 3.0,
        nu: JumpDistribution::new(vec![1.0, -2.0, 4.0], vec![0.5, 0.3, 0.2]).unwrap(),
        ..MarketParams::default()
    };
    let paths = simulate_ensemble(&params, 100, 5, 20_000).unwrap();
    let counts: Vec<f64> = paths.iter().map(|p| p.flows().len() as f64).collect();
    let e = Estimate::from_samples(&counts);
    assert!((e.mean - 3.0).abs() <= 3.0 * e.stderr, "{e:?}");
    let var = counts.iter().map(|c| (c - e.mean).powi(2)).sum::<f64>() / (counts.len() - 1) as f64;
    assert!((var - 3.0).abs() < 0.15, "{var}");
    let sizes: Vec<f64> = paths.iter().flat_map(|p| p.flows().iter().map(|f| f.size)).collect();
    for (atom, prob) in [(1.0, 0.5), (-2.0, 0.3), (4.0, 0.2)] {
        let freq = sizes.iter().filter(|s| **s == atom).count() as f64 / sizes.len() as f64;
        let se = (prob * (1.0 - prob) / sizes.len() as f64).sqrt();
        assert!((freq - prob).abs() <= 3.0 * se, "{atom}: {freq}");
    }
    // arrivals sit on the mesh strictly after the start
    assert!(paths.iter().flat_map(|p| p.flows()).all(|f| f.index >= 1 && f.index <= 100));
}

#[test]
fn paths_are_reproducible_and_streams_independent() {
    let params = MarketParams::default();
    let a = simulate_steps(&params, 64, 99).unwrap();
    let b = simulate_steps(&params, 64, 99).unwrap();
    let c = simulate_steps(&params, 64, 100).unwrap();
    assert_eq!(a.x(), b.x());
    assert_eq!(a.flows(), b.flows());
    assert_ne!(a.x(), c.x());
    let ens = simulate_ensemble(&params, 64, 7, 3).unwrap();
    let again = simulate_ensemble(&params, 64, 7, 3).unwrap();
    for (a, b) in ens.iter().zip(&again) {
        assert_eq!((a.x(), a.flows(), a.seed()), (b.x(), b.flows(), b.seed()));
    }
}

#[test]
fn frozen_market_is_flat() {
    let params = MarketParams::default().frozen();
    let p = simulate_steps(&params, 30, 1).unwrap();
    assert!(p.x().iter().all(|x| *x == params.x0));
    assert!(p.flows().is_empty());
}
