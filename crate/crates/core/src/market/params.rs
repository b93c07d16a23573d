use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

type CoefficientFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// Drift `b(t, x)` and volatility `σ(t, x)` of the fundamental price.
#[derive(Clone)]
pub enum Coefficients {
    /// `b = μ̂·x`, `σ = σ̂·x`.
    Geometric { mu: f64, sigma: f64 },
    Custom { drift: CoefficientFn, vol: CoefficientFn },
}

impl fmt::Debug for Coefficients {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coefficients::Geometric { mu, sigma } => {
                f.debug_struct("Geometric").field("mu", mu).field("sigma", sigma).finish()
            }
            Coefficients::Custom { .. } => f.write_str("Custom"),
        }
    }
}

impl Coefficients {
    pub fn custom<B, S>(drift: B, vol: S) -> Result<Self>
    where
        B: Fn(f64, f64) -> f64 + Send + Sync + 'static,
        S: Fn(f64, f64) -> f64 + Send + Sync + 'static,
    {
        for i in 0..=10 {
            let t = i as f64 / 10.0;
            if vol(t, 0.0) != 0.0 || drift(t, 0.0) < 0.0 {
                return Err(Error::ModelViolation(
                    "price dynamics must satisfy σ(t,0) = 0 and b(t,0) ≥ 0".into(),
                ));
            }
        }
        Ok(Coefficients::Custom { drift: Arc::new(drift), vol: Arc::new(vol) })
    }

    pub fn drift(&self, t: f64, x: f64) -> f64 {
        match self {
            Coefficients::Geometric { mu, .. } => mu * x,
            Coefficients::Custom { drift, .. } => drift(t, x),
        }
    }

    pub fn vol(&self, t: f64, x: f64) -> f64 {
        match self {
            Coefficients::Geometric { sigma, .. } => sigma * x,
            Coefficients::Custom { vol, .. } => vol(t, x),
        }
    }

    /// Exact mean of `X_T` under the Euler scheme with `n` steps, when known.
    pub fn euler_mean(&self, x0: f64, horizon: f64, n: usize) -> Option<f64> {
        match *self {
            Coefficients::Geometric { mu, .. } => Some(x0 * (1.0 + mu * horizon / n as f64).powi(n as i32)),
            Coefficients::Custom { .. } => None,
        }
    }
}

/// Order-flow size distribution with finite support.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JumpDistribution {
    support: Vec<f64>,
    probs: Vec<f64>,
}

impl JumpDistribution {
    pub fn new(support: Vec<f64>, probs: Vec<f64>) -> Result<Self> {
        if support.is_empty() || support.len() != probs.len() {
            return Err(Error::config(
                "market.nu_probs",
                format!("need one probability per support point ({} vs {})", probs.len(), support.len()),
            ));
        }
        if support.iter().any(|u| !u.is_finite()) {
            return Err(Error::config("market.nu_support", "sizes must be finite"));
        }
        if probs.iter().any(|p| !(*p >= 0.0)) {
            return Err(Error::config("market.nu_probs", "probabilities must be non-negative"));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::config("market.nu_probs", format!("probabilities sum to {total}, not 1")));
        }
        Ok(JumpDistribution { support, probs })
    }

    /// Two-point law: `+up` w.p. `p`, `−down` otherwise.
    pub fn two_point(up: f64, down: f64, p: f64) -> Result<Self> {
        Self::new(vec![up, -down], vec![p, 1.0 - p])
    }

    pub fn atoms(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.support.iter().copied().zip(self.probs.iter().copied())
    }

    pub fn support(&self) -> &[f64] {
        &self.support
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn max_positive(&self) -> f64 {
        self.atoms().filter(|(_, p)| *p > 0.0).map(|(u, _)| u).fold(0.0, f64::max)
    }

    pub fn mean_abs(&self) -> f64 {
        self.atoms().map(|(u, p)| u.abs() * p).sum()
    }

    /// Inverse-CDF draw from a uniform `u ∈ [0, 1)`.
    pub fn sample_with(&self, u: f64) -> f64 {
        let mut acc = 0.0;
        for (size, p) in self.atoms() {
            acc += p;
            if u < acc {
                return size;
            }
        }
        *self.support.last().expect("non-empty support")
    }
}

/// Everything needed to simulate the market and state the control problem.
#[derive(Clone, Debug)]
pub struct MarketParams {
    pub coefficients: Coefficients,
    pub lambda: f64,
    pub nu: JumpDistribution,
    pub horizon: f64,
    pub target: f64,
    pub x0: f64,
    pub q0: f64,
}

impl Default for MarketParams {
    fn default() -> Self {
        MarketParams {
            coefficients: Coefficients::Geometric { mu: 0.0, sigma: 0.2 },
            lambda: 2.0,
            nu: JumpDistribution::two_point(2.0, 2.0, 0.5).expect("valid default"),
            horizon: 1.0,
            target: 5.0,
            x0: 100.0,
            q0: 10.0,
        }
    }
}

impl MarketParams {
    pub fn validate(&self) -> Result<()> {
        if let Coefficients::Geometric { mu, sigma } = self.coefficients {
            if !mu.is_finite() {
                return Err(Error::config("market.b", "drift must be finite"));
            }
            if !(sigma >= 0.0 && sigma.is_finite()) {
                return Err(Error::config("market.sigma", format!("must be non-negative, got {sigma}")));
            }
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::config("market.lambda", format!("must be non-negative, got {}", self.lambda)));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(Error::config("market.T", format!("must be positive, got {}", self.horizon)));
        }
        if !(self.target >= 0.0 && self.target.is_finite()) {
            return Err(Error::config("market.K", format!("must be non-negative, got {}", self.target)));
        }
        if !(self.x0 > 0.0 && self.x0.is_finite()) {
            return Err(Error::config("market.x0", format!("must be positive, got {}", self.x0)));
        }
        if !(self.q0 >= 0.0 && self.q0.is_finite()) {
            return Err(Error::config("market.q0", format!("must be non-negative, got {}", self.q0)));
        }
        Ok(())
    }

    /// Frozen market: no noise, no order flow.
    pub fn frozen(mut self) -> Self {
        self.coefficients = Coefficients::Geometric { mu: 0.0, sigma: 0.0 };
        self.lambda = 0.0;
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jump_law_checks() {
        assert!(JumpDistribution::new(vec![1.0], vec![0.9]).is_err());
        assert!(JumpDistribution::new(vec![1.0, 2.0], vec![1.0]).is_err());
        let nu = JumpDistribution::two_point(2.0, 3.0, 0.25).unwrap();
        assert_eq!(nu.sample_with(0.1), 2.0);
        assert_eq!(nu.sample_with(0.5), -3.0);
        assert_eq!(nu.max_positive(), 2.0);
        assert!((nu.mean_abs() - 2.75).abs() < 1e-15);
    }

    #[test]
    fn custom_coefficients_need_absorbing_zero() {
        assert!(Coefficients::custom(|_, x| 0.1 * x, |_, x| 0.2 * x).is_ok());
        assert!(Coefficients::custom(|_, _| 0.1, |_, _| 0.2).is_err());
    }

    #[test]
    fn defaults_validate() {
        assert!(MarketParams::default().validate().is_ok());
        let bad = MarketParams { lambda: -1.0, ..MarketParams::default() };
        assert!(matches!(bad.validate(), Err(Error::Config { key, .. }) if key == "market.lambda"));
    }
}
