//! Monte Carlo check of the dynamic programming principle between two
//! grid times.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lob::UtilityModel;
use crate::market::{simulate_steps, stream_seed, CostModel, MarketParams, PenaltyModel, Strategy};
use crate::policy::{synthesize, FieldObstacle, ObstacleSource, Summary};
use crate::qvi::ValueField;

/// Obstacle source with time measured from `offset`.
struct Shifted<'a, S: ObstacleSource> {
    inner: &'a S,
    offset: f64,
}

impl<S: ObstacleSource> ObstacleSource for Shifted<'_, S> {
    fn delta(&self) -> f64 {
        self.inner.delta()
    }
    fn target(&self) -> f64 {
        self.inner.target()
    }
    fn obstacle(&self, t: f64, x: f64, y: f64, q: f64) -> f64 {
        self.inner.obstacle(t + self.offset, x, y, q)
    }
    fn tie_tolerance(&self) -> f64 {
        self.inner.tie_tolerance()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Candidate {
    /// No purchases on `[t₁, t₂)`.
    Flat,
    /// Constant rate `K/T`, capped by the available volume.
    Twap,
    /// The feedback strategy read off the value field.
    Policy,
}

impl Candidate {
    pub const ALL: [Candidate; 3] = [Candidate::Flat, Candidate::Twap, Candidate::Policy];
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CandidateResult {
    pub candidate: Candidate,
    /// `E[∫_{t₁}^{t₂} U dπ + v(t₂, X, π, Q)]`.
    pub estimate: Summary,
    /// `estimate ≥ V(t₁) − tol − 3·stderr`.
    pub above_value: bool,
    /// `|estimate − V(t₁)| ≤ tol + 3·stderr`.
    pub attains_value: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DppReport {
    pub t1: f64,
    pub t2: f64,
    pub value: f64,
    pub tolerance: f64,
    pub candidates: Vec<CandidateResult>,
}

impl DppReport {
    pub fn get(&self, c: Candidate) -> Option<&CandidateResult> {
        self.candidates.iter().find(|r| r.candidate == c)
    }
}

/// Standard errors used for every stochastic assertion.
pub const MC_BAND: f64 = 3.0;

/// Compares `V(t₁, x₀, 0, q₀)` with the DPP right-hand side of each
/// candidate, on `n_paths` paths of `steps` steps over `[t₁, t₂]`.
#[allow(clippy::too_many_arguments)]
pub fn dpp_residual(
    field: &ValueField,
    utility: &UtilityModel,
    penalty: &PenaltyModel,
    params: &MarketParams,
    t1: f64,
    t2: f64,
    n_paths: usize,
    steps: usize,
    seed: u64,
) -> Result<DppReport> {
    if !(t2 >= t1 && t1 >= 0.0 && t2 <= params.horizon) {
        return Err(Error::Domain(format!("need 0 ≤ t₁ ≤ t₂ ≤ T, got [{t1}, {t2}]")));
    }
    let value = field.interpolate(t1, params.x0, 0.0, params.q0);
    let tolerance = field.scheme().tolerance;
    if t2 == t1 {
        let exact = Summary::new(&[value], &[params.x0], None);
        let candidates = Candidate::ALL
            .iter()
            .map(|&candidate| CandidateResult { candidate, estimate: exact, above_value: true, attains_value: true })
            .collect();
        return Ok(DppReport { t1, t2, value, tolerance, candidates });
    }
    let seg = MarketParams { horizon: t2 - t1, ..params.clone() };
    let dt = seg.horizon / steps as f64;
    let cost = CostModel { utility, penalty, params: &seg };
    let src = FieldObstacle::new(field, utility, params);
    let shifted = Shifted { inner: &src, offset: t1 };
    let rows: Vec<([f64; 3], f64)> = (0..n_paths as u64)
        .into_par_iter()
        .map(|i| -> Result<([f64; 3], f64)> {
            let path = simulate_steps(&seg, steps, stream_seed(seed, i))?;
            let mut out = [0.0; 3];
            for (slot, c) in out.iter_mut().zip(Candidate::ALL) {
                let strat = match c {
                    Candidate::Flat => Strategy::idle(0.0, steps, dt),
                    Candidate::Twap => Strategy::new(0.0, dt, vec![params.target / params.horizon; steps], vec![])?
                        .make_admissible(&path, &seg)?,
                    Candidate::Policy => synthesize(&shifted, &path, &seg)?,
                };
                let (running, trace) = cost.running_cost(&path, &strat)?;
                let k = *trace.pi.last().expect("trace");
                let q = *trace.q.last().expect("trace");
                *slot = running.j1 + field.interpolate(t2, path.terminal_x(), k, q);
            }
            Ok((out, path.terminal_x()))
        })
        .collect::<Result<_>>()?;
    let x_end: Vec<f64> = rows.iter().map(|r| r.1).collect();
    let x_mean = seg.coefficients.euler_mean(seg.x0, seg.horizon, steps);
    let candidates = Candidate::ALL
        .iter()
        .enumerate()
        .map(|(c, &candidate)| {
            let samples: Vec<f64> = rows.iter().map(|r| r.0[c]).collect();
            let estimate = Summary::new(&samples, &x_end, x_mean);
            let e = estimate.controlled;
            CandidateResult {
                candidate,
                estimate,
                above_value: e.mean >= value - tolerance - MC_BAND * e.stderr,
                attains_value: (e.mean - value).abs() <= tolerance + MC_BAND * e.stderr,
            }
        })
        .collect();
    Ok(DppReport { t1, t2, value, tolerance, candidates })
}
