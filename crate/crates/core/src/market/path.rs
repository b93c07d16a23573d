use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp, StandardNormal};
use rayon::prelude::*;

use super::params::MarketParams;
use crate::error::{Error, Result};

/// One order-flow arrival. `time` is the raw arrival, `index` the mesh
/// point it is attached to (the first one at or after `time`).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Flow {
    pub time: f64,
    pub index: usize,
    pub size: f64,
}

/// A realized `(X, Y)` pair on a uniform mesh.
#[derive(Clone, Debug)]
pub struct MarketPath {
    dt: f64,
    x: Vec<f64>,
    flows: Vec<Flow>,
    seed: u64,
}

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of the `i`-th stream under root seed `root`:
/// `splitmix64(root + i·0x9E3779B97F4A7C15)`.
pub fn stream_seed(root: u64, i: u64) -> u64 {
    splitmix64(root.wrapping_add(i.wrapping_mul(GOLDEN)))
}

pub fn stream_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Number of mesh steps for step size `dt` on `[0, horizon]`.
pub fn steps_for(horizon: f64, dt: f64) -> Result<usize> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::config("mc.dt", format!("step must be positive, got {dt}")));
    }
    let n = (horizon / dt).round();
    if n < 1.0 || ((n * dt - horizon) / horizon).abs() > 1e-9 {
        return Err(Error::config("mc.dt", format!("step {dt} does not divide the horizon {horizon}")));
    }
    Ok(n as usize)
}

impl MarketPath {
    /// Builds a path from explicit samples. Flows are sorted by mesh index.
    pub fn from_parts(dt: f64, x: Vec<f64>, mut flows: Vec<Flow>) -> Result<Self> {
        if x.len() < 2 {
            return Err(Error::Domain("a path needs at least one step".into()));
        }
        if let Some(bad) = flows.iter().find(|f| f.index == 0 || f.index >= x.len()) {
            return Err(Error::Domain(format!("flow at mesh index {} outside (0, {}]", bad.index, x.len() - 1)));
        }
        flows.sort_by(|a, b| a.index.cmp(&b.index).then(a.time.total_cmp(&b.time)));
        Ok(MarketPath { dt, x, flows, seed: 0 })
    }

    /// Constant price, no flow.
    pub fn flat(x0: f64, n_steps: usize, dt: f64) -> Self {
        MarketPath { dt, x: vec![x0; n_steps + 1], flows: Vec::new(), seed: 0 }
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn n_steps(&self) -> usize {
        self.x.len() - 1
    }

    pub fn horizon(&self) -> f64 {
        self.dt * self.n_steps() as f64
    }

    pub fn time(&self, n: usize) -> f64 {
        self.dt * n as f64
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn terminal_x(&self) -> f64 {
        *self.x.last().expect("non-empty path")
    }

    pub fn flows(&self) -> &[Flow] {
        &self.flows
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Flows attached to mesh point `n`, in arrival order.
    pub fn flows_at(&self, n: usize) -> impl Iterator<Item = &Flow> {
        let start = self.flows.partition_point(|f| f.index < n);
        self.flows[start..].iter().take_while(move |f| f.index == n)
    }

    pub fn has_flow_at(&self, n: usize) -> bool {
        self.flows_at(n).next().is_some()
    }

    /// First mesh index strictly after `n` carrying a flow.
    pub fn next_flow_after(&self, n: usize) -> Option<usize> {
        let i = self.flows.partition_point(|f| f.index <= n);
        self.flows.get(i).map(|f| f.index)
    }

    /// Net order flow attached to each mesh point.
    pub fn flow_increments(&self) -> Vec<f64> {
        let mut dy = vec![0.0; self.x.len()];
        for f in &self.flows {
            dy[f.index] += f.size;
        }
        dy
    }
}

/// Euler–Maruyama price path and compound-Poisson flow with step `dt`.
///
/// All price normals are drawn before the flow, so two parameter sets that
/// differ only in the flow share the same price path for a given seed.
pub fn simulate_path(params: &MarketParams, dt: f64, seed: u64) -> Result<MarketPath> {
    let n = steps_for(params.horizon, dt)?;
    simulate_steps(params, n, seed)
}

pub fn simulate_steps(params: &MarketParams, n_steps: usize, seed: u64) -> Result<MarketPath> {
    if n_steps == 0 {
        return Err(Error::config("mc.steps", "need at least one step"));
    }
    let dt = params.horizon / n_steps as f64;
    let sqrt_dt = dt.sqrt();
    let floor = f64::EPSILON * params.x0;
    let mut rng = stream_rng(seed);
    let mut x = Vec::with_capacity(n_steps + 1);
    x.push(params.x0);
    let mut cur = params.x0;
    for step in 0..n_steps {
        let t = step as f64 * dt;
        let z: f64 = rng.sample(StandardNormal);
        let next = cur + params.coefficients.drift(t, cur) * dt + params.coefficients.vol(t, cur) * sqrt_dt * z;
        if !next.is_finite() {
            return Err(Error::Simulation { step, message: format!("price sample {next} from {cur}") });
        }
        cur = next.max(floor);
        x.push(cur);
    }
    let mut flows = Vec::new();
    if params.lambda > 0.0 {
        let gaps = Exp::new(params.lambda).map_err(|e| Error::config("market.lambda", e.to_string()))?;
        let mut tau = 0.0;
        loop {
            tau += rng.sample::<f64, _>(gaps);
            if tau > params.horizon {
                break;
            }
            let index = ((tau / dt).ceil() as usize).clamp(1, n_steps);
            let size = params.nu.sample_with(rng.random::<f64>());
            flows.push(Flow { time: tau, index, size });
        }
    }
    Ok(MarketPath { dt, x, flows, seed })
}

/// `n` independent paths; path `i` uses [`stream_seed`]`(root, i)`.
pub fn simulate_ensemble(params: &MarketParams, n_steps: usize, root: u64, n: usize) -> Result<Vec<MarketPath>> {
    (0..n as u64)
        .into_par_iter()
        .map(|i| simulate_steps(params, n_steps, stream_seed(root, i)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::market::params::Coefficients;

    #[test]
    fn deterministic_given_seed() {
        let p = MarketParams::default();
        let a = simulate_steps(&p, 50, 7).unwrap();
        let b = simulate_steps(&p, 50, 7).unwrap();
        assert_eq!(a.x(), b.x());
        assert_eq!(a.flows(), b.flows());
        let c = simulate_steps(&p, 50, 8).unwrap();
        assert_ne!(a.x(), c.x());
    }

    #[test]
    fn noise_free_limit() {
        let p = MarketParams {
            coefficients: Coefficients::Geometric { mu: 0.05, sigma: 0.0 },
            lambda: 0.0,
            ..MarketParams::default()
        };
        let path = simulate_path(&p, 1e-3, 1).unwrap();
        assert!(path.flows().is_empty());
        assert!((path.terminal_x() - 100.0 * 0.05f64.exp()).abs() < 100.0 * 0.05 * 0.05 * 1e-3);
    }

    #[test]
    fn flows_are_snapped_forward() {
        let p = MarketParams { lambda: 20.0, ..MarketParams::default() };
        let path = simulate_steps(&p, 40, 3).unwrap();
        assert!(!path.flows().is_empty());
        for w in path.flows().windows(2) {
            assert!(w[0].time < w[1].time);
        }
        for f in path.flows() {
            assert!(path.time(f.index) >= f.time - 1e-12);
            assert!(path.time(f.index - 1) < f.time);
        }
    }

    #[test]
    fn dt_must_divide_horizon() {
        let p = MarketParams::default();
        assert!(simulate_path(&p, 0.3, 0).is_err());
        assert_eq!(simulate_path(&p, 0.25, 0).unwrap().n_steps(), 4);
    }

    #[test]
    fn price_paths_shared_across_intensity() {
        let p = MarketParams::default();
        let q = MarketParams { lambda: 0.0, ..MarketParams::default() };
        assert_eq!(simulate_steps(&p, 30, 11).unwrap().x(), simulate_steps(&q, 30, 11).unwrap().x());
    }

    #[test]
    fn flow_queries() {
        let flows = vec![
            Flow { time: 0.35, index: 4, size: 1.0 },
            Flow { time: 0.15, index: 2, size: -1.0 },
            Flow { time: 0.38, index: 4, size: 2.0 },
        ];
        let path = MarketPath::from_parts(0.1, vec![1.0; 11], flows).unwrap();
        assert_eq!(path.flows_at(4).count(), 2);
        assert!(!path.has_flow_at(3));
        assert_eq!(path.next_flow_after(2), Some(4));
        assert_eq!(path.next_flow_after(4), None);
        assert_eq!(path.flow_increments()[4], 3.0);
    }
}
