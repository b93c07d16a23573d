use std::sync::atomic::{AtomicBool, Ordering};

use log::warn;
use serde::{Deserialize, Serialize};

use crate::lob::UtilityModel;
use crate::market::MarketParams;
use crate::qvi::ValueField;

/// Anything that can evaluate the obstacle `ℳ[v](t, x, y, q)` along a
/// diagonal of holdings `y` spaced by [`delta`](ObstacleSource::delta).
pub trait ObstacleSource: Sync {
    fn delta(&self) -> f64;
    fn target(&self) -> f64;
    /// `ℳ` at holding `y` with `q` shares left in the book.
    fn obstacle(&self, t: f64, x: f64, y: f64, q: f64) -> f64;
    /// Values of `ℳ` at or below this count as zero, i.e. as trading.
    fn tie_tolerance(&self) -> f64;
}

/// `ℳ` computed from an interpolated value field.
pub struct FieldObstacle<'a> {
    field: &'a ValueField,
    utility: &'a UtilityModel,
    target: f64,
    tie: f64,
    warned: AtomicBool,
}

/// Relative size of `ℳ` treated as a tie, per unit of `value_scale / Δ`.
pub const TIE_RELATIVE: f64 = 1e-10;

impl<'a> FieldObstacle<'a> {
    pub fn new(field: &'a ValueField, utility: &'a UtilityModel, params: &MarketParams) -> Self {
        let tie = TIE_RELATIVE * field.value_scale().max(1.0) / field.grid().delta();
        FieldObstacle { field, utility, target: params.target, tie, warned: AtomicBool::new(false) }
    }

    pub fn field(&self) -> &ValueField {
        self.field
    }

    fn value(&self, t: f64, x: f64, k: f64, q: f64) -> f64 {
        let (v, outside) = self.field.interpolate_checked(t, x, k, q);
        if outside && !self.warned.swap(true, Ordering::Relaxed) {
            warn!("state (t={t:.4}, x={x:.4}, k={k:.4}, q={q:.4}) outside the solved grid; clamping");
        }
        v
    }

    /// Whether any evaluation so far had to clamp to the grid.
    pub fn extrapolated(&self) -> bool {
        self.warned.load(Ordering::Relaxed)
    }
}

impl ObstacleSource for FieldObstacle<'_> {
    fn delta(&self) -> f64 {
        self.field.grid().delta()
    }

    fn target(&self) -> f64 {
        self.target
    }

    fn obstacle(&self, t: f64, x: f64, y: f64, q: f64) -> f64 {
        let d = self.delta();
        let here = self.value(t, x, y, q);
        let next = self.value(t, x, (y + d).min(self.target), (q - d).max(0.0));
        self.utility.value(x, q.max(0.0)) + (next - here) / d
    }

    fn tie_tolerance(&self) -> f64 {
        self.tie
    }
}

/// Interval `(start, end)` of holdings where `ℳ > 0`. An interval starting
/// at zero contains zero.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub start: f64,
    pub end: f64,
}

impl Interval {
    pub fn contains(&self, y: f64) -> bool {
        (y > self.start || (self.start == 0.0 && y == 0.0)) && y < self.end
    }
}

/// Inaction set `O(t, x, s)` within `[0, cap]`, `cap = K ∧ s`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub intervals: Vec<Interval>,
    pub cap: f64,
}

impl Region {
    /// Groups consecutive positive nodes `y_j = jΔ` into intervals with a
    /// half-node margin on each side, clipped to `[0, cap]`.
    pub fn from_signs(positive: &[bool], delta: f64, cap: f64) -> Region {
        let mut intervals = Vec::new();
        let mut j = 0;
        while j < positive.len() {
            if !positive[j] {
                j += 1;
                continue;
            }
            let a = j;
            while j < positive.len() && positive[j] {
                j += 1;
            }
            let start = ((a as f64 - 0.5) * delta).max(0.0);
            let end = ((j as f64 - 0.5) * delta).min(cap);
            if end > start {
                intervals.push(Interval { start, end });
            }
        }
        Region { intervals, cap }
    }

    pub fn contains(&self, y: f64) -> bool {
        self.intervals.iter().any(|i| i.contains(y))
    }

    /// `φ(k) = inf{y > k : y ∈ O} ∧ cap`, and `k` itself when `k ∈ O`.
    pub fn jump_map(&self, k: f64) -> f64 {
        if k >= self.cap {
            return k;
        }
        let target = match self.intervals.iter().find(|i| i.end > k) {
            Some(i) if i.start <= k => k,
            Some(i) => i.start,
            None => self.cap,
        };
        target.min(self.cap).max(k)
    }
}

/// `O(t, x, s)` scanned on the holdings grid `y_j = jΔ < K ∧ s` with `q = s − y_j`.
pub fn inaction_region<S: ObstacleSource + ?Sized>(src: &S, t: f64, x: f64, s: f64) -> Region {
    let d = src.delta();
    let cap = src.target().min(s).max(0.0);
    let tie = src.tie_tolerance();
    let mut signs = Vec::new();
    let mut j = 0usize;
    loop {
        let y = j as f64 * d;
        if y >= cap - 1e-12 * d {
            break;
        }
        signs.push(src.obstacle(t, x, y, s - y) > tie);
        j += 1;
    }
    Region::from_signs(&signs, d, cap)
}
