use lob_exec::market::JumpDistribution;
use lob_exec::qvi::{solve, GridSpec};
use lob_exec::verification::dpp::{dpp_residual, Candidate};
use lob_exec::verification::mini::{brute_force_value, oracle_comparison, MiniInstance};
use lob_exec::verification::regularity::{monotonicity_scan, residual_check};
use lob_exec::{Error, MarketParams, PenaltyModel, UtilityModel};

/// A thin book with positive inflows: the optimal buyer waits for liquidity,
/// so the policy is non-trivial.
fn thin_book() -> MarketParams {
    MarketParams { q0: 4.0, nu: JumpDistribution::new(vec![2.0], vec![1.0]).unwrap(), ..MarketParams::default() }
}

#[test]
fn checks_hold_off_the_default_model() {
    let (u, g, p) = (UtilityModel::default(), PenaltyModel::default(), thin_book());
    let field = solve(&GridSpec::default(), &u, &g, &p).unwrap();

    let r = residual_check(&field, &u, &p);
    assert!(r.passed(), "{r:?}");
    let m = monotonicity_scan(&field);
    assert!(m.passed(), "{m:?}");

    let inst = MiniInstance::from_model(&p, &u, &g, 3, 8).unwrap();
    let o = oracle_comparison(&inst, &field).unwrap();
    assert!(o.probes.len() >= 9 && o.max_relative <= 0.05, "{}", o.max_relative);

    let d = dpp_residual(&field, &u, &g, &p, 0.0, 0.5, 1000, 100, 3).unwrap();
    assert!(d.candidates.iter().all(|c| c.above_value), "{d:?}");
    assert!(d.get(Candidate::Policy).unwrap().attains_value, "{d:?}");
}

#[test]
fn degenerate_dpp_interval_is_exact() {
    let (u, g, p) = (UtilityModel::default(), PenaltyModel::default(), MarketParams::default());
    let field = solve(&GridSpec { nt: 6, nx: 10, nk: 5, ..GridSpec::default() }, &u, &g, &p).unwrap();
    let d = dpp_residual(&field, &u, &g, &p, 0.5, 0.5, 100, 10, 1).unwrap();
    for c in &d.candidates {
        assert_eq!(c.estimate.controlled.mean, d.value);
        assert!(c.above_value && c.attains_value);
    }
}

#[test]
fn oracle_with_nothing_to_buy_is_free() {
    let p = MarketParams { target: 0.0, ..MarketParams::default() };
    let inst = MiniInstance::from_model(&p, &UtilityModel::default(), &PenaltyModel::default(), 3, 4).unwrap();
    assert_eq!(brute_force_value(&inst).unwrap(), 0.0);
}

#[test]
fn oracle_refuses_oversized_instances() {
    let (u, g, p) = (UtilityModel::default(), PenaltyModel::default(), MarketParams::default());
    assert!(matches!(MiniInstance::from_model(&p, &u, &g, 9, 8), Err(Error::Config { .. })));
    assert!(matches!(MiniInstance::from_model(&p, &u, &g, 3, 50), Err(Error::Config { .. })));
}
