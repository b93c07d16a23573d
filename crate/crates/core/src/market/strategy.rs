use std::io::Write;

use super::params::MarketParams;
use super::path::MarketPath;
use crate::error::{Error, Result};

/// Relative slack used when comparing purchases with available volume.
pub(crate) const VOLUME_SLACK: f64 = 1e-9;

/// Non-decreasing càglàd purchase path on a uniform mesh.
///
/// `rate[n]` is the purchase rate on `[t_n, t_{n+1})`. A jump `(n, s)` moves
/// holdings from `π_{t_n}` to `π_{t_n+} = π_{t_n} + s`, so it executes after
/// any order flow attached to `t_n` has been seen. Jumps at the terminal
/// mesh point are not representable.
#[derive(Clone, Debug, PartialEq)]
pub struct Strategy {
    k0: f64,
    dt: f64,
    rates: Vec<f64>,
    jumps: Vec<(usize, f64)>,
}

impl Strategy {
    pub fn new(k0: f64, dt: f64, rates: Vec<f64>, jumps: Vec<(usize, f64)>) -> Result<Self> {
        if !(k0 >= 0.0 && k0.is_finite()) {
            return Err(Error::Domain(format!("initial holding must be non-negative, got {k0}")));
        }
        if !(dt > 0.0) || rates.is_empty() {
            return Err(Error::Domain("strategy needs a positive step and at least one cell".into()));
        }
        if let Some(r) = rates.iter().find(|r| !(**r >= 0.0 && r.is_finite())) {
            return Err(Error::Domain(format!("purchase rate {r} is negative or non-finite")));
        }
        let n = rates.len();
        let mut merged: Vec<(usize, f64)> = Vec::with_capacity(jumps.len());
        let mut sorted = jumps;
        sorted.sort_by_key(|j| j.0);
        for (i, s) in sorted {
            if i >= n {
                return Err(Error::Domain(format!("jump at mesh index {i}: only [0, {n}) allowed")));
            }
            if !(s >= 0.0 && s.is_finite()) {
                return Err(Error::Domain(format!("jump size {s} is negative or non-finite")));
            }
            if s == 0.0 {
                continue;
            }
            match merged.last_mut() {
                Some(last) if last.0 == i => last.1 += s,
                _ => merged.push((i, s)),
            }
        }
        Ok(Strategy { k0, dt, rates, jumps: merged })
    }

    /// No trading.
    pub fn idle(k0: f64, n_steps: usize, dt: f64) -> Self {
        Strategy { k0, dt, rates: vec![0.0; n_steps], jumps: Vec::new() }
    }

    /// Constant rate that reaches `target` at the horizon.
    pub fn twap(k0: f64, target: f64, n_steps: usize, dt: f64) -> Self {
        let rate = ((target - k0) / (n_steps as f64 * dt)).max(0.0);
        Strategy { k0, dt, rates: vec![rate; n_steps], jumps: Vec::new() }
    }

    /// Pure jump strategy.
    pub fn jumps(k0: f64, n_steps: usize, dt: f64, jumps: Vec<(usize, f64)>) -> Result<Self> {
        Strategy::new(k0, dt, vec![0.0; n_steps], jumps)
    }

    /// Pure jump strategy from `(time, size)` purchases, each snapped to the
    /// nearest mesh point before the horizon.
    pub fn schedule(k0: f64, n_steps: usize, dt: f64, plan: &[(f64, f64)]) -> Result<Self> {
        let jumps = plan
            .iter()
            .map(|&(t, s)| (((t / dt).round() as usize).min(n_steps.saturating_sub(1)), s))
            .collect();
        Strategy::jumps(k0, n_steps, dt, jumps)
    }

    pub fn k0(&self) -> f64 {
        self.k0
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn n_steps(&self) -> usize {
        self.rates.len()
    }

    pub fn rates(&self) -> &[f64] {
        &self.rates
    }

    pub fn jump_list(&self) -> &[(usize, f64)] {
        &self.jumps
    }

    pub fn is_continuous(&self) -> bool {
        self.jumps.is_empty()
    }

    pub fn jump_at(&self, n: usize) -> f64 {
        self.jumps.iter().find(|j| j.0 == n).map_or(0.0, |j| j.1)
    }

    /// `π_{t_n}` (left limit: jumps at `t_n` not yet included).
    pub fn holding(&self, n: usize) -> f64 {
        let jumps: f64 = self.jumps.iter().filter(|j| j.0 < n).map(|j| j.1).sum();
        let cont: f64 = self.rates[..n.min(self.rates.len())].iter().sum::<f64>() * self.dt;
        self.k0 + jumps + cont
    }

    pub fn terminal_holding(&self) -> f64 {
        self.holding(self.rates.len())
    }

    fn check_mesh(&self, path: &MarketPath) -> Result<()> {
        if path.n_steps() != self.n_steps() || (path.dt() - self.dt).abs() > 1e-12 * self.dt.max(1.0) {
            return Err(Error::Domain(format!(
                "strategy mesh ({} × {}) differs from path mesh ({} × {})",
                self.n_steps(),
                self.dt,
                path.n_steps(),
                path.dt()
            )));
        }
        Ok(())
    }

    /// `π^m`: keeps the continuous part and the first `m²` jumps of size at
    /// least `1/m`.
    pub fn jump_truncate(&self, m: u32) -> Strategy {
        assert!(m >= 1, "truncation level must be at least 1");
        let threshold = 1.0 / m as f64;
        let cap = (m as usize).saturating_mul(m as usize);
        let jumps = self.jumps.iter().copied().filter(|j| j.1 >= threshold).take(cap).collect();
        Strategy { jumps, ..self.clone() }
    }

    /// Continuous approximation: each jump becomes a ramp of slope `Δπ/δ`
    /// (δ rounded to the mesh) that stops at the next strategy jump or the
    /// next order-flow arrival, whichever comes first. Mass not delivered
    /// by then is dropped.
    pub fn jump_smooth(&self, delta: f64, path: &MarketPath) -> Result<Strategy> {
        self.check_mesh(path)?;
        if !(delta > 0.0) {
            return Err(Error::Domain(format!("smoothing width must be positive, got {delta}")));
        }
        let m = ((delta / self.dt).round() as usize).max(1);
        let n = self.n_steps();
        let mut rates = self.rates.clone();
        for (j, &(i, size)) in self.jumps.iter().enumerate() {
            let mut end = (i + m).min(n);
            if let Some(&(next, _)) = self.jumps.get(j + 1) {
                end = end.min(next);
            }
            if let Some(f) = path.next_flow_after(i) {
                end = end.min(f);
            }
            let rate = size / (m as f64 * self.dt);
            for r in &mut rates[i..end] {
                *r += rate;
            }
        }
        Ok(Strategy { k0: self.k0, dt: self.dt, rates, jumps: Vec::new() })
    }

    /// Moves every jump that coincides with an order-flow arrival to the
    /// next mesh point without one. Jumps pushed past the last cell are dropped.
    pub fn make_predictable(&self, path: &MarketPath) -> Result<Strategy> {
        self.check_mesh(path)?;
        let n = self.n_steps();
        let mut jumps = Vec::with_capacity(self.jumps.len());
        for &(i, s) in &self.jumps {
            let mut k = i;
            while k < n && path.has_flow_at(k) {
                k += 1;
            }
            if k < n {
                jumps.push((k, s));
            }
        }
        Strategy::new(self.k0, self.dt, self.rates.clone(), jumps)
    }

    /// Predictable version that also never buys more than the book holds nor
    /// more than the target: jumps and cell purchases are capped on `path`.
    pub fn make_admissible(&self, path: &MarketPath, params: &MarketParams) -> Result<Strategy> {
        let pred = self.make_predictable(path)?;
        let n = pred.n_steps();
        let mut q = params.q0;
        let mut pi = pred.k0;
        let mut rates = pred.rates.clone();
        let mut jumps = Vec::new();
        for (step, rate) in rates.iter_mut().enumerate() {
            for f in path.flows_at(step) {
                q = (q + f.size).max(0.0);
            }
            let room = (params.target - pi).max(0.0);
            let j = pred.jump_at(step).min(q).min(room);
            if j > 0.0 {
                jumps.push((step, j));
                q -= j;
                pi += j;
            }
            let room = (params.target - pi).max(0.0);
            let amount = (*rate * pred.dt).min(q).min(room);
            *rate = amount / pred.dt;
            q -= amount;
            pi += amount;
        }
        debug_assert_eq!(n, rates.len());
        Strategy::new(pred.k0, pred.dt, rates, jumps)
    }
}

/// `(π, Q)` sampled at each mesh point, before any jump at that point.
#[derive(Clone, Debug, PartialEq)]
pub struct InventoryTrace {
    pub pi: Vec<f64>,
    pub q: Vec<f64>,
}

/// One purchase event seen while walking a strategy along a path.
#[derive(Clone, Copy, Debug)]
pub(crate) enum Trade {
    Jump { x: f64, q: f64, size: f64 },
    Cell { x_mid: f64, q: f64, amount: f64 },
}

/// Walks `strat` along `path`, enforcing admissibility, and reports every
/// purchase to `on_trade`.
pub(crate) fn walk<F: FnMut(Trade) -> Result<()>>(
    path: &MarketPath,
    strat: &Strategy,
    params: &MarketParams,
    mut on_trade: F,
) -> Result<InventoryTrace> {
    strat.check_mesh(path)?;
    let n = strat.n_steps();
    let mut q = params.q0;
    let mut pi = strat.k0;
    let mut trace = InventoryTrace { pi: Vec::with_capacity(n + 1), q: Vec::with_capacity(n + 1) };
    let x = path.x();
    let mut next_jump = 0usize;
    for step in 0..=n {
        let t = path.time(step);
        for f in path.flows_at(step) {
            q = (q + f.size).max(0.0);
        }
        trace.pi.push(pi);
        trace.q.push(q);
        if step == n {
            break;
        }
        if let Some(&(i, size)) = strat.jumps.get(next_jump) {
            if i == step {
                next_jump += 1;
                if path.has_flow_at(step) {
                    return Err(Error::Admissibility {
                        time: t,
                        message: "strategy jump coincides with an order-flow arrival".into(),
                    });
                }
                if size > q * (1.0 + VOLUME_SLACK) + VOLUME_SLACK {
                    return Err(Error::Admissibility {
                        time: t,
                        message: format!("jump of {size} exceeds book volume {q}"),
                    });
                }
                let size = size.min(q);
                on_trade(Trade::Jump { x: x[step], q, size })?;
                q -= size;
                pi += size;
            }
        }
        let rate = strat.rates[step];
        if rate > 0.0 {
            let amount = rate * strat.dt;
            if amount > q * (1.0 + VOLUME_SLACK) + VOLUME_SLACK {
                return Err(Error::Admissibility {
                    time: t + q / rate,
                    message: format!("continuous purchase of {amount} exceeds book volume {q}"),
                });
            }
            let amount = amount.min(q);
            on_trade(Trade::Cell { x_mid: 0.5 * (x[step] + x[step + 1]), q, amount })?;
            q -= amount;
            pi += amount;
        }
    }
    if pi > params.target * (1.0 + VOLUME_SLACK) + VOLUME_SLACK {
        return Err(Error::Admissibility {
            time: path.horizon(),
            message: format!("terminal holding {pi} exceeds target {}", params.target),
        });
    }
    Ok(trace)
}

/// Inventory `Q^π` and holdings along `path`.
pub fn evolve_inventory(path: &MarketPath, strat: &Strategy, params: &MarketParams) -> Result<InventoryTrace> {
    walk(path, strat, params, |_| Ok(()))
}

/// Writes `t,X,Q,pi,dY` rows, one per mesh point.
pub fn write_trace_csv<W: Write>(mut out: W, path: &MarketPath, trace: &InventoryTrace) -> Result<()> {
    writeln!(out, "t,X,Q,pi,dY")?;
    let dy = path.flow_increments();
    for (n, ((q, pi), dy)) in trace.q.iter().zip(&trace.pi).zip(&dy).enumerate() {
        writeln!(out, "{},{},{q},{pi},{dy}", path.time(n), path.x()[n])?;
    }
    Ok(())
}
