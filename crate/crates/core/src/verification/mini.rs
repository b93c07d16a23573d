//! Exhaustive backward induction on a small discrete surrogate of the
//! execution problem.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lob::UtilityModel;
use crate::market::{Coefficients, JumpDistribution, MarketParams, PenaltyModel};

pub const MAX_STEPS: usize = 4;
pub const MAX_LEVELS: usize = 8;
pub const MAX_NODES: usize = 100_000;

/// `n_steps` decision dates `t_j = jT/n`; `X` on a recombining trinomial
/// chain; at most one order-flow arrival per step; holdings restricted to
/// `M` evenly spaced levels in `[0, K]`.
#[derive(Clone, Debug)]
pub struct MiniInstance {
    pub n_steps: usize,
    pub levels: usize,
    pub horizon: f64,
    pub x0: f64,
    pub q0: f64,
    pub target: f64,
    pub mu: f64,
    pub sigma: f64,
    pub lambda: f64,
    pub nu: JumpDistribution,
    pub utility: UtilityModel,
    pub penalty: PenaltyModel,
}

impl MiniInstance {
    pub fn from_model(
        params: &MarketParams,
        utility: &UtilityModel,
        penalty: &PenaltyModel,
        n_steps: usize,
        levels: usize,
    ) -> Result<Self> {
        let (mu, sigma) = match params.coefficients {
            Coefficients::Geometric { mu, sigma } => (mu, sigma),
            Coefficients::Custom { .. } => {
                return Err(Error::config("market.b", "the discrete oracle needs geometric dynamics"))
            }
        };
        let inst = MiniInstance {
            n_steps,
            levels,
            horizon: params.horizon,
            x0: params.x0,
            q0: params.q0,
            target: params.target,
            mu,
            sigma,
            lambda: params.lambda,
            nu: params.nu.clone(),
            utility: utility.clone(),
            penalty: *penalty,
        };
        inst.validate()?;
        Ok(inst)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_steps == 0 || self.n_steps > MAX_STEPS {
            return Err(Error::config("mini.n_steps", format!("must be in 1..={MAX_STEPS}, got {}", self.n_steps)));
        }
        if self.levels < 2 || self.levels > MAX_LEVELS {
            return Err(Error::config("mini.levels", format!("must be in 2..={MAX_LEVELS}, got {}", self.levels)));
        }
        Ok(())
    }

    pub fn dt(&self) -> f64 {
        self.horizon / self.n_steps as f64
    }

    pub fn time(&self, step: usize) -> f64 {
        self.dt() * step as f64
    }

    /// Price at chain node `(step, i)`, `−step ≤ i ≤ step`.
    pub fn x(&self, step: usize, i: i32) -> f64 {
        let dt = self.dt();
        let up = (self.sigma * (3.0 * dt).sqrt()).exp();
        self.x0 * (self.mu * dt).exp().powi(step as i32) * up.powi(i)
    }

    pub fn level(&self, l: usize) -> f64 {
        self.target * l as f64 / (self.levels - 1) as f64
    }

    /// `(up, middle, down)` probabilities; the chain keeps `E[X_{j+1} | X_j] = e^{μ̂Δt} X_j`.
    fn branch_probs(&self) -> [f64; 3] {
        if self.sigma == 0.0 {
            return [0.0, 1.0, 0.0];
        }
        let u = (self.sigma * (3.0 * self.dt()).sqrt()).exp();
        let d = 1.0 / u;
        let pu = (1.0 - d) / (3.0 * (u - d));
        let pd = (u - 1.0) / (3.0 * (u - d));
        [pu, 2.0 / 3.0, pd]
    }
}

type Key = (usize, i32, usize, i64);

/// Memoized optimal values of a [`MiniInstance`].
pub struct BruteForce<'a> {
    inst: &'a MiniInstance,
    memo: HashMap<Key, f64>,
    probs: [f64; 3],
    p_flow: f64,
}

const Q_QUANTUM: f64 = 1e-9;

impl<'a> BruteForce<'a> {
    pub fn new(inst: &'a MiniInstance) -> Result<Self> {
        inst.validate()?;
        Ok(BruteForce {
            inst,
            memo: HashMap::new(),
            probs: inst.branch_probs(),
            p_flow: 1.0 - (-inst.lambda * inst.dt()).exp(),
        })
    }

    pub fn nodes(&self) -> usize {
        self.memo.len()
    }

    /// Value at decision date `step`, chain node `i`, holding level `l`, book volume `q`.
    pub fn value(&mut self, step: usize, i: i32, l: usize, q: f64) -> Result<f64> {
        let inst = self.inst;
        if inst.target == 0.0 {
            return Ok(0.0);
        }
        let key = (step, i, l, (q / Q_QUANTUM).round() as i64);
        if let Some(v) = self.memo.get(&key) {
            return Ok(*v);
        }
        if self.memo.len() >= MAX_NODES {
            return Err(Error::config("mini", format!("state space exceeds {MAX_NODES} nodes")));
        }
        let x = inst.x(step, i);
        let k = inst.level(l);
        let v = if step == inst.n_steps {
            inst.penalty.value(&inst.utility, x, inst.target - k)
        } else {
            let snap = inst.utility.snapshot(x, q)?;
            let mut best = f64::INFINITY;
            for l2 in l..inst.levels {
                let alpha = inst.level(l2) - k;
                if alpha > q + 1e-12 {
                    break;
                }
                let alpha = alpha.min(q);
                let now = snap.smoothed_cost(alpha)?;
                let later = self.expected_next(step, i, l2, q - alpha)?;
                best = best.min(now + later);
            }
            best
        };
        self.memo.insert(key, v);
        Ok(v)
    }

    fn expected_next(&mut self, step: usize, i: i32, l: usize, q: f64) -> Result<f64> {
        let moves = [1, 0, -1];
        let probs = self.probs;
        let atoms: Vec<(f64, f64)> = self.inst.nu.atoms().collect();
        let mut acc = 0.0;
        for (m, p) in moves.iter().zip(probs) {
            if p == 0.0 {
                continue;
            }
            let i2 = i + m;
            let mut branch = (1.0 - self.p_flow) * self.value(step + 1, i2, l, q)?;
            if self.p_flow > 0.0 {
                for &(u, pu) in &atoms {
                    branch += self.p_flow * pu * self.value(step + 1, i2, l, (q + u).max(0.0))?;
                }
            }
            acc += p * branch;
        }
        Ok(acc)
    }
}

/// Root value `V(0, x₀, 0, q₀)` of the instance.
pub fn brute_force_value(inst: &MiniInstance) -> Result<f64> {
    BruteForce::new(inst)?.value(0, 0, 0, inst.q0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn instance(n: usize) -> MiniInstance {
        MiniInstance::from_model(&MarketParams::default(), &UtilityModel::default(), &PenaltyModel::default(), n, 8)
            .unwrap()
    }

    #[test]
    fn zero_target_is_free() {
        let mut inst = instance(3);
        inst.target = 0.0;
        assert_eq!(brute_force_value(&inst).unwrap(), 0.0);
    }

    #[test]
    fn terminal_layer_is_the_penalty() {
        let inst = instance(2);
        let mut bf = BruteForce::new(&inst).unwrap();
        for l in 0..inst.levels {
            let expect = inst.penalty.value(&inst.utility, inst.x(2, -1), inst.target - inst.level(l));
            assert_eq!(bf.value(2, -1, l, 3.0).unwrap(), expect);
        }
    }

    #[test]
    fn one_step_frozen_market_is_a_direct_minimum() {
        let params = MarketParams::default().frozen();
        let u = UtilityModel::default();
        let g = PenaltyModel::default();
        let inst = MiniInstance::from_model(&params, &u, &g, 1, 8).unwrap();
        let snap = u.snapshot(100.0, 10.0).unwrap();
        let direct = (0..8)
            .map(|l| {
                let a = 5.0 * l as f64 / 7.0;
                snap.smoothed_cost(a).unwrap() + g.value(&u, 100.0, 5.0 - a)
            })
            .fold(f64::INFINITY, f64::min);
        assert!((brute_force_value(&inst).unwrap() - direct).abs() < 1e-10);
    }

    #[test]
    fn size_bounds_are_enforced() {
        let p = MarketParams::default();
        let u = UtilityModel::default();
        let g = PenaltyModel::default();
        assert!(MiniInstance::from_model(&p, &u, &g, 5, 8).is_err());
        assert!(MiniInstance::from_model(&p, &u, &g, 3, 9).is_err());
    }

    #[test]
    fn trinomial_is_a_martingale_without_drift() {
        let inst = instance(3);
        let [pu, pm, pd] = inst.branch_probs();
        assert!((pu + pm + pd - 1.0).abs() < 1e-15);
        let m = pu * inst.x(1, 1) + pm * inst.x(1, 0) + pd * inst.x(1, -1);
        assert!((m - inst.x0).abs() < 1e-10);
    }
}

/// Brute-force against interpolated QVI value at one probe.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleProbe {
    pub t: f64,
    pub x: f64,
    pub k: f64,
    pub q: f64,
    pub brute_force: f64,
    pub qvi: f64,
    pub relative: f64,
    /// Difference of the parts above `(K − k)·x`, for information.
    pub premium_difference: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub probes: Vec<OracleProbe>,
    pub max_relative: f64,
    pub nodes: usize,
}

/// Probes every chain node with `|i| ≤ 1` before the last decision date,
/// holding levels `0` and `2`, and book volumes `{0.6, 1, 1.4}·q₀`.
pub fn oracle_comparison(inst: &MiniInstance, field: &crate::qvi::ValueField) -> Result<OracleReport> {
    let mut bf = BruteForce::new(inst)?;
    bf.value(0, 0, 0, inst.q0)?;
    let mut probes = Vec::new();
    for step in 0..inst.n_steps {
        let span = step.min(1) as i32;
        for i in -span..=span {
            for l in [0usize, 2] {
                for factor in [0.6, 1.0, 1.4] {
                    let q = factor * inst.q0;
                    let x = inst.x(step, i);
                    let k = inst.level(l);
                    let t = inst.time(step);
                    let brute = bf.value(step, i, l, q)?;
                    let qvi = field.interpolate(t, x, k, q);
                    let linear = (inst.target - k) * x;
                    probes.push(OracleProbe {
                        t,
                        x,
                        k,
                        q,
                        brute_force: brute,
                        qvi,
                        relative: (qvi - brute).abs() / brute.abs().max(f64::MIN_POSITIVE),
                        premium_difference: (qvi - linear) - (brute - linear),
                    });
                }
            }
        }
    }
    let max_relative = probes.iter().map(|p| p.relative).fold(0.0, f64::max);
    Ok(OracleReport { probes, max_relative, nodes: bf.nodes() })
}
