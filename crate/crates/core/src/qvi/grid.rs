use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::market::MarketParams;

/// Uniform one-dimensional mesh with `n` nodes starting at `min`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub min: f64,
    pub step: f64,
    pub n: usize,
}

impl Axis {
    pub fn new(min: f64, max: f64, intervals: usize) -> Axis {
        if intervals == 0 {
            return Axis { min, step: 0.0, n: 1 };
        }
        Axis { min, step: (max - min) / intervals as f64, n: intervals + 1 }
    }

    pub fn max(&self) -> f64 {
        self.value(self.n - 1)
    }

    pub fn value(&self, i: usize) -> f64 {
        self.min + self.step * i as f64
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(|i| self.value(i))
    }

    /// Cell index and weight of the upper node for linear interpolation.
    /// Values outside the axis clamp to the nearest end; the flag reports it.
    pub fn locate(&self, v: f64) -> (usize, f64, bool) {
        if self.n == 1 || self.step == 0.0 {
            return (0, 0.0, v != self.min);
        }
        let s = (v - self.min) / self.step;
        let last = (self.n - 1) as f64;
        let outside = s < -1e-9 || s > last + 1e-9;
        let s = s.clamp(0.0, last);
        let i = (s.floor() as usize).min(self.n - 2);
        (i, s - i as f64, outside)
    }

    /// Nearest node index.
    pub fn nearest(&self, v: f64) -> usize {
        if self.step == 0.0 {
            return 0;
        }
        (((v - self.min) / self.step).round().max(0.0) as usize).min(self.n - 1)
    }
}

/// Node counts and bounds requested for the solver. Counts are numbers of
/// intervals. The `q` spacing always equals the `k` spacing.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSpec {
    pub nt: usize,
    pub nx: usize,
    pub nk: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x_min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q_max: Option<f64>,
    /// Explicit sub-steps per stored time slice; chosen automatically when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub substeps: Option<usize>,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec { nt: 20, nx: 30, nk: 30, x_min: None, x_max: None, q_max: None, substeps: None }
    }
}

/// Default `q` headroom: `q₀` plus four of the largest inflows.
pub const Q_HEADROOM_FACTOR: f64 = 4.0;

/// Tensor mesh over `(t, x, k, q)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub t: Axis,
    pub x: Axis,
    pub k: Axis,
    pub q: Axis,
}

impl Grid {
    pub fn build(spec: &GridSpec, params: &MarketParams) -> Result<Grid> {
        if spec.nt == 0 {
            return Err(Error::config("grid.nt", "need at least one time interval"));
        }
        if spec.nx < 2 {
            return Err(Error::config("grid.nx", "need at least two x intervals"));
        }
        if spec.nk == 0 {
            return Err(Error::config("grid.nk", "need at least one k interval"));
        }
        let x_min = spec.x_min.unwrap_or(params.x0 / 4.0);
        let x_max = spec.x_max.unwrap_or(params.x0 * 4.0);
        if !(x_min > 0.0) {
            return Err(Error::config("grid.x_min", format!("must be positive, got {x_min}")));
        }
        if !(x_max > x_min) {
            return Err(Error::config("grid.x_max", format!("must exceed x_min = {x_min}, got {x_max}")));
        }
        let q_req = spec
            .q_max
            .unwrap_or(params.q0 + Q_HEADROOM_FACTOR * params.nu.max_positive())
            .max(params.q0);
        if !(q_req > 0.0 && q_req.is_finite()) {
            return Err(Error::config("grid.q_max", format!("must be positive, got {q_req}")));
        }
        let (k, delta) = if params.target > 0.0 {
            (Axis::new(0.0, params.target, spec.nk), params.target / spec.nk as f64)
        } else {
            let d = q_req / spec.nk as f64;
            (Axis { min: 0.0, step: d, n: 1 }, d)
        };
        let nq = ((q_req / delta) - 1e-9).ceil().max(1.0) as usize;
        Ok(Grid {
            t: Axis::new(0.0, params.horizon, spec.nt),
            x: Axis::new(x_min, x_max, spec.nx),
            k,
            q: Axis { min: 0.0, step: delta, n: nq + 1 },
        })
    }

    /// Common spacing of `k` and `q`.
    pub fn delta(&self) -> f64 {
        self.q.step
    }

    pub fn slice_len(&self) -> usize {
        self.x.n * self.k.n * self.q.n
    }

    pub fn len(&self) -> usize {
        self.t.n * self.slice_len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Offset of `(x, k, q)` within one time slice.
    #[inline]
    pub fn offset(&self, i: usize, k: usize, l: usize) -> usize {
        (i * self.k.n + k) * self.q.n + l
    }

    #[inline]
    pub fn index(&self, n: usize, i: usize, k: usize, l: usize) -> usize {
        n * self.slice_len() + self.offset(i, k, l)
    }

    /// `Δt/T + Δx/(x_max − x_min) + Δq/q_max`, the dimensionless mesh size.
    pub fn mesh_measure(&self) -> f64 {
        self.t.step / self.t.max() + self.x.step / (self.x.max() - self.x.min) + self.q.step / self.q.max()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_grid_ties_k_and_q() {
        let g = Grid::build(&GridSpec::default(), &MarketParams::default()).unwrap();
        assert_eq!(g.t.n, 21);
        assert_eq!(g.x.n, 31);
        assert_eq!(g.k.n, 31);
        assert!((g.delta() - 1.0 / 6.0).abs() < 1e-15);
        assert!((g.q.max() - 18.0).abs() < 1e-12);
        assert_eq!(g.q.n, 109);
        assert_eq!(g.x.min, 25.0);
        assert_eq!(g.x.max(), 400.0);
    }

    #[test]
    fn bad_bounds_name_the_key() {
        let spec = GridSpec { x_min: Some(-1.0), ..GridSpec::default() };
        assert!(matches!(Grid::build(&spec, &MarketParams::default()), Err(Error::Config { key, .. }) if key == "grid.x_min"));
    }

    #[test]
    fn locate_clamps() {
        let a = Axis::new(0.0, 1.0, 4);
        let (i, w, out) = a.locate(0.6);
        assert!(i == 2 && (w - 0.4).abs() < 1e-12 && !out);
        let (i, w, out) = a.locate(1.5);
        assert_eq!((i, w, out), (3, 1.0, true));
        assert_eq!(a.nearest(0.6), 2);
    }
}
