//! Run configuration loaded from TOML.
//!
//! Every section is optional and falls back to the library defaults, so an
//! empty file describes the default experiment. Unknown keys are rejected.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lob::{UtilityModel, UtilitySpec};
use crate::market::{Coefficients, JumpDistribution, MarketParams, PenaltyModel};
use crate::policy::RolloutConfig;
use crate::qvi::GridSpec;
use crate::verification::SuiteConfig;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UtilitySection {
    pub family: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
}

impl Default for UtilitySection {
    fn default() -> Self {
        UtilitySection { family: "exponential".into(), a: Some(1.0), gamma: Some(0.1), b: None }
    }
}

impl UtilitySection {
    pub fn spec(&self) -> Result<UtilitySpec> {
        let need = |v: Option<f64>, key: &str| v.ok_or_else(|| Error::config(key, "required for this family"));
        match self.family.as_str() {
            "exponential" => {
                if self.b.is_some() {
                    return Err(Error::config("utility.b", "not used by the exponential family"));
                }
                Ok(UtilitySpec::Exponential { a: need(self.a, "utility.a")?, gamma: need(self.gamma, "utility.gamma")? })
            }
            "linear" => {
                if self.gamma.is_some() {
                    return Err(Error::config("utility.gamma", "not used by the linear family"));
                }
                Ok(UtilitySpec::Linear { a: need(self.a, "utility.a")?, b: need(self.b, "utility.b")? })
            }
            other => Err(Error::config("utility.family", format!("unknown family `{other}` (exponential, linear)"))),
        }
    }
}

/// Geometric price dynamics and the order-flow law.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MarketSection {
    /// Drift per unit price.
    pub b: f64,
    pub sigma: f64,
    pub lambda: f64,
    pub nu_support: Vec<f64>,
    pub nu_probs: Vec<f64>,
    #[serde(rename = "T")]
    pub horizon: f64,
    #[serde(rename = "K")]
    pub target: f64,
    pub x0: f64,
    pub q0: f64,
}

impl Default for MarketSection {
    fn default() -> Self {
        let p = MarketParams::default();
        let (mu, sigma) = match p.coefficients {
            Coefficients::Geometric { mu, sigma } => (mu, sigma),
            Coefficients::Custom { .. } => unreachable!("default dynamics are geometric"),
        };
        MarketSection {
            b: mu,
            sigma,
            lambda: p.lambda,
            nu_support: p.nu.support().to_vec(),
            nu_probs: p.nu.probs().to_vec(),
            horizon: p.horizon,
            target: p.target,
            x0: p.x0,
            q0: p.q0,
        }
    }
}

impl MarketSection {
    pub fn params(&self) -> Result<MarketParams> {
        let params = MarketParams {
            coefficients: Coefficients::Geometric { mu: self.b, sigma: self.sigma },
            lambda: self.lambda,
            nu: JumpDistribution::new(self.nu_support.clone(), self.nu_probs.clone())?,
            horizon: self.horizon,
            target: self.target,
            x0: self.x0,
            q0: self.q0,
        };
        params.validate()?;
        Ok(params)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PenaltySection {
    pub eta: f64,
}

impl Default for PenaltySection {
    fn default() -> Self {
        PenaltySection { eta: PenaltyModel::default().eta }
    }
}

/// Monte Carlo settings shared by every command.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct McSection {
    pub paths: usize,
    /// Root seed; per-path streams are derived from it.
    pub seed: u64,
    pub steps: usize,
    pub smooth_delta: f64,
}

impl Default for McSection {
    fn default() -> Self {
        let r = RolloutConfig::default();
        McSection { paths: r.n_paths, seed: r.seed, steps: r.steps, smooth_delta: r.smooth_delta }
    }
}

/// Strategy evaluated by `simulate`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulateSection {
    /// `twap`, `terminal`, `greedy` or `jumps`.
    pub strategy: String,
    /// Planned `[time, size]` purchases for the `jumps` strategy.
    pub jumps: Vec<[f64; 2]>,
    /// Number of paths written out in full.
    pub write_paths: usize,
}

impl Default for SimulateSection {
    fn default() -> Self {
        SimulateSection { strategy: "twap".into(), jumps: vec![[0.25, 2.0], [0.6, 1.5]], write_paths: 5 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    /// `lambda`, `gamma`, `a`, `eta` or `sigma`.
    pub axis: String,
    pub values: Vec<f64>,
}

impl Default for SweepSection {
    fn default() -> Self {
        SweepSection { axis: "lambda".into(), values: vec![0.0, 1.0, 2.0] }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub dir: PathBuf,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection { dir: PathBuf::from("out") }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub utility: UtilitySection,
    pub market: MarketSection,
    pub penalty: PenaltySection,
    pub grid: GridSpec,
    pub mc: McSection,
    pub simulate: SimulateSection,
    pub sweep: SweepSection,
    pub output: OutputSection,
}

/// Validated model pieces built from a [`RunConfig`].
#[derive(Clone, Debug)]
pub struct Model {
    pub utility: UtilityModel,
    pub penalty: PenaltyModel,
    pub params: MarketParams,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        cfg.model()?;
        cfg.check_runs()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn model(&self) -> Result<Model> {
        Ok(Model {
            utility: UtilityModel::from_spec(&self.utility.spec()?)?,
            penalty: PenaltyModel::new(self.penalty.eta)?,
            params: self.market.params()?,
        })
    }

    fn check_runs(&self) -> Result<()> {
        if self.mc.paths == 0 {
            return Err(Error::config("mc.paths", "need at least one path"));
        }
        if self.mc.steps == 0 {
            return Err(Error::config("mc.steps", "need at least one step"));
        }
        if !(self.mc.smooth_delta > 0.0 && self.mc.smooth_delta.is_finite()) {
            return Err(Error::config("mc.smooth_delta", "must be positive"));
        }
        if !["twap", "terminal", "greedy", "jumps"].contains(&self.simulate.strategy.as_str()) {
            return Err(Error::config(
                "simulate.strategy",
                format!("unknown strategy `{}` (twap, terminal, greedy, jumps)", self.simulate.strategy),
            ));
        }
        for [t, size] in &self.simulate.jumps {
            if !(*t >= 0.0 && *t < self.market.horizon) || !(*size >= 0.0) {
                return Err(Error::config("simulate.jumps", format!("bad purchase [{t}, {size}]")));
            }
        }
        if !SWEEP_AXES.contains(&self.sweep.axis.as_str()) {
            return Err(Error::config("sweep.axis", format!("unknown axis `{}` ({})", self.sweep.axis, SWEEP_AXES.join(", "))));
        }
        if self.sweep.values.is_empty() {
            return Err(Error::config("sweep.values", "need at least one value"));
        }
        Ok(())
    }

    pub fn rollout(&self) -> RolloutConfig {
        RolloutConfig { n_paths: self.mc.paths, steps: self.mc.steps, seed: self.mc.seed, smooth_delta: self.mc.smooth_delta }
    }

    pub fn suite(&self) -> SuiteConfig {
        SuiteConfig {
            grid: self.grid.clone(),
            n_paths: self.mc.paths,
            seed: self.mc.seed,
            rollout_steps: self.mc.steps,
            smooth_delta: self.mc.smooth_delta,
            ..SuiteConfig::default()
        }
    }

    /// Copy of the config with one sweep parameter replaced.
    pub fn with_axis(&self, axis: &str, value: f64) -> Result<RunConfig> {
        let mut c = self.clone();
        match axis {
            "lambda" => c.market.lambda = value,
            "sigma" => c.market.sigma = value,
            "eta" => c.penalty.eta = value,
            "a" => c.utility.a = Some(value),
            "gamma" => {
                if c.utility.family != "exponential" {
                    return Err(Error::config("sweep.axis", "gamma sweeps need the exponential family"));
                }
                c.utility.gamma = Some(value);
            }
            other => return Err(Error::config("sweep.axis", format!("unknown axis `{other}`"))),
        }
        c.model()?;
        Ok(c)
    }
}

pub const SWEEP_AXES: [&str; 5] = ["lambda", "gamma", "a", "eta", "sigma"];

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_is_the_default_model() {
        let cfg = RunConfig::from_toml("").unwrap();
        assert_eq!(cfg, RunConfig::default());
        let m = cfg.model().unwrap();
        assert_eq!(m.params.target, 5.0);
        assert_eq!(m.penalty.eta, 0.5);
        assert!(matches!(m.utility, UtilityModel::Exponential { a, gamma } if a == 1.0 && gamma == 0.1));
    }

    #[test]
    fn round_trips_through_toml() {
        let cfg = RunConfig::default();
        assert_eq!(RunConfig::from_toml(&cfg.to_toml()).unwrap(), cfg);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(matches!(RunConfig::from_toml("[market]\nkappa = 1.0\n"), Err(Error::Parse(_))));
        assert!(matches!(RunConfig::from_toml("[extra]\n"), Err(Error::Parse(_))));
    }

    #[test]
    fn invalid_values_name_their_key() {
        let key = |text: &str| match RunConfig::from_toml(text) {
            Err(Error::Config { key, .. }) => key,
            other => panic!("expected a config error, got {other:?}"),
        };
        assert_eq!(key("[market]\nsigma = -1.0\n"), "market.sigma");
        assert_eq!(key("[market]\nnu_probs = [0.2, 0.2]\n"), "market.nu_probs");
        assert_eq!(key("[utility]\nfamily = \"linear\"\na = 1.0\n"), "utility.b");
        assert_eq!(key("[penalty]\neta = -0.1\n"), "penalty.eta");
        assert_eq!(key("[sweep]\naxis = \"mu\"\n"), "sweep.axis");
        assert_eq!(key("[mc]\npaths = 0\n"), "mc.paths");
    }

    #[test]
    fn sweep_axis_replaces_one_parameter() {
        let c = RunConfig::default().with_axis("gamma", 0.3).unwrap();
        assert_eq!(c.utility.gamma, Some(0.3));
        assert_eq!(c.market, RunConfig::default().market);
    }
}
