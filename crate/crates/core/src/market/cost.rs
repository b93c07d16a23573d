use serde::{Deserialize, Serialize};

use super::params::MarketParams;
use super::path::MarketPath;
use super::strategy::{walk, InventoryTrace, Strategy, Trade};
use crate::error::{Error, Result};
use crate::lob::UtilityModel;

/// Terminal shortfall penalty `g(x, y) = U(x, 0)·y + η·y²`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PenaltyModel {
    pub eta: f64,
}

impl Default for PenaltyModel {
    fn default() -> Self {
        PenaltyModel { eta: 0.5 }
    }
}

impl PenaltyModel {
    pub fn new(eta: f64) -> Result<Self> {
        if !(eta >= 0.0 && eta.is_finite()) {
            return Err(Error::config("penalty.eta", format!("must be non-negative, got {eta}")));
        }
        Ok(PenaltyModel { eta })
    }

    /// `g(x, y)`; tiny negative shortfalls from rounding count as zero.
    pub fn value(&self, utility: &UtilityModel, x: f64, y: f64) -> f64 {
        let y = y.max(0.0);
        utility.value(x, 0.0) * y + self.eta * y * y
    }
}

/// Pathwise realized costs of one strategy.
///
/// `j` prices jumps at the book cost `C`, `j1` at the smoothed cost `D`,
/// and `j0` at the best ask `U(X, Q)·Δπ`. Continuous purchases cost
/// `∫ U(X, Q) dπ^c` in all three.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostReport {
    pub j: f64,
    pub j0: f64,
    pub j1: f64,
    pub terminal_penalty: f64,
    pub shortfall: f64,
}

/// Purchase costs under the three jump pricings, before the terminal penalty.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunningCost {
    pub j: f64,
    pub j0: f64,
    pub j1: f64,
}

/// Bundles the model pieces the cost functionals need.
#[derive(Clone, Copy, Debug)]
pub struct CostModel<'a> {
    pub utility: &'a UtilityModel,
    pub penalty: &'a PenaltyModel,
    pub params: &'a MarketParams,
}

impl CostModel<'_> {
    pub fn evaluate(&self, path: &MarketPath, strat: &Strategy) -> Result<CostReport> {
        let (running, trace) = self.running_cost(path, strat)?;
        let held = *trace.pi.last().expect("non-empty trace");
        let shortfall = (self.params.target - held).max(0.0);
        let g = self.penalty.value(self.utility, path.terminal_x(), shortfall);
        Ok(CostReport { j: running.j + g, j0: running.j0 + g, j1: running.j1 + g, terminal_penalty: g, shortfall })
    }

    /// Purchase costs without the terminal penalty, with the inventory trace.
    pub fn running_cost(&self, path: &MarketPath, strat: &Strategy) -> Result<(RunningCost, InventoryTrace)> {
        let mut acc = RunningCost { j: 0.0, j0: 0.0, j1: 0.0 };
        let trace = walk(path, strat, self.params, |trade| {
            match trade {
                Trade::Jump { x, q, size } => {
                    let snap = self.utility.snapshot(x, q)?;
                    acc.j += snap.execution_cost(size)?;
                    acc.j1 += snap.smoothed_cost(size)?;
                    acc.j0 += snap.best_ask() * size;
                }
                Trade::Cell { x_mid, q, amount } => {
                    let c = self.utility.snapshot(x_mid, q)?.smoothed_cost(amount)?;
                    acc.j += c;
                    acc.j0 += c;
                    acc.j1 += c;
                }
            }
            Ok(())
        })?;
        Ok((acc, trace))
    }

    pub fn cost_j(&self, path: &MarketPath, strat: &Strategy) -> Result<f64> {
        Ok(self.evaluate(path, strat)?.j)
    }

    pub fn cost_j0(&self, path: &MarketPath, strat: &Strategy) -> Result<f64> {
        Ok(self.evaluate(path, strat)?.j0)
    }

    pub fn cost_j1(&self, path: &MarketPath, strat: &Strategy) -> Result<f64> {
        Ok(self.evaluate(path, strat)?.j1)
    }
}
