//! Every verification check at the default model.

use lob_exec::verification::{run_suite, SuiteConfig};
use lob_exec::{MarketParams, PenaltyModel, Result, UtilityModel};

fn main() -> Result<()> {
    let report = run_suite(&UtilityModel::default(), &PenaltyModel::default(), &MarketParams::default(), &SuiteConfig::default())?;
    for c in &report.checks {
        println!("{:<26} {:?} {:.4e} (tol {:.4e}) {:.2}s\n    {}", c.name, c.status, c.statistic, c.tolerance, c.seconds, c.detail);
    }
    println!("all passed: {}", report.passed());
    Ok(())
}
