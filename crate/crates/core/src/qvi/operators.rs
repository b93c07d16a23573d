use rayon::prelude::*;

use super::field::ValueField;
use super::grid::Grid;
use crate::lob::UtilityModel;
use crate::market::MarketParams;

/// Three-point stencil `(c₋, c₀, c₊)` of `b ∂x + ½σ² ∂xx` at one price node.
pub type Stencil = [f64; 3];

#[derive(Clone, Copy, Debug)]
struct JumpTap {
    rate: f64,
    lo: usize,
    w: f64,
}

/// Discretized generator of the uncontrolled state and the obstacle operator.
pub struct Operator<'a> {
    grid: &'a Grid,
    params: &'a MarketParams,
    utility: &'a UtilityModel,
    taps: Vec<JumpTap>,
    atoms: usize,
}

impl<'a> Operator<'a> {
    pub fn new(grid: &'a Grid, params: &'a MarketParams, utility: &'a UtilityModel) -> Self {
        let atoms: Vec<(f64, f64)> = params.nu.atoms().filter(|(_, p)| *p > 0.0).collect();
        let mut taps = Vec::with_capacity(grid.q.n * atoms.len());
        for l in 0..grid.q.n {
            let q = grid.q.value(l);
            for &(u, p) in &atoms {
                // (q + u)⁺, clamped to q_max
                let target = (q + u).max(0.0);
                let (lo, w, _) = grid.q.locate(target);
                taps.push(JumpTap { rate: params.lambda * p, lo, w });
            }
        }
        Operator { grid, params, utility, taps, atoms: atoms.len() }
    }

    pub fn grid(&self) -> &Grid {
        self.grid
    }

    /// Price stencils at time `t`. Interior nodes use central differences,
    /// switching to upwinding on the drift when `|b|Δx > σ²`. The two end
    /// nodes drop the second derivative and take a one-sided inward first
    /// derivative.
    pub fn stencils(&self, t: f64) -> Vec<Stencil> {
        let ax = &self.grid.x;
        let dx = ax.step;
        let last = ax.n - 1;
        (0..ax.n)
            .map(|i| {
                let x = ax.value(i);
                let b = self.params.coefficients.drift(t, x);
                let s = self.params.coefficients.vol(t, x);
                let s2 = s * s;
                if i == 0 {
                    [0.0, -b / dx, b / dx]
                } else if i == last {
                    [-b / dx, b / dx, 0.0]
                } else if b.abs() * dx <= s2 {
                    let d = 0.5 * s2 / (dx * dx);
                    let a = 0.5 * b / dx;
                    [d - a, -2.0 * d, d + a]
                } else {
                    let d = 0.5 * s2 / (dx * dx);
                    if b > 0.0 {
                        [d, -2.0 * d - b / dx, d + b / dx]
                    } else {
                        [d - b / dx, -2.0 * d + b / dx, d]
                    }
                }
            })
            .collect()
    }

    /// Largest diagonal rate of the full generator at time `t`. An explicit
    /// step `h` keeps the update monotone when `h · max_rate ≤ 1`.
    pub fn max_rate(&self, t: f64) -> f64 {
        let jump = self.params.lambda;
        self.stencils(t).iter().map(|s| (-s[1]).max(0.0) + jump).fold(0.0, f64::max)
    }

    /// Generator applied at one node of a single time slice.
    #[inline]
    pub fn generator_at(&self, slice: &[f64], stencils: &[Stencil], i: usize, k: usize, l: usize) -> f64 {
        let g = self.grid;
        let c = stencils[i];
        let mut acc = c[1] * slice[g.offset(i, k, l)];
        if c[0] != 0.0 {
            acc += c[0] * slice[g.offset(i - 1, k, l)];
        }
        if c[2] != 0.0 {
            acc += c[2] * slice[g.offset(i + 1, k, l)];
        }
        acc + self.jump_at(slice, i, k, l)
    }

    #[inline]
    fn jump_at(&self, slice: &[f64], i: usize, k: usize, l: usize) -> f64 {
        if self.atoms == 0 {
            return 0.0;
        }
        let g = self.grid;
        let base = g.offset(i, k, 0);
        let row = &slice[base..base + g.q.n];
        let here = row[l];
        let mut acc = 0.0;
        for tap in &self.taps[l * self.atoms..(l + 1) * self.atoms] {
            let v = if tap.w == 0.0 { row[tap.lo] } else { (1.0 - tap.w) * row[tap.lo] + tap.w * row[tap.lo + 1] };
            acc += tap.rate * (v - here);
        }
        acc
    }

    /// One explicit step `next = slice + h·A[slice]`, in parallel over price nodes.
    pub fn explicit_step(&self, slice: &[f64], t: f64, h: f64, next: &mut [f64]) {
        let g = self.grid;
        let stencils = self.stencils(t);
        let block = g.k.n * g.q.n;
        next.par_chunks_mut(block).enumerate().for_each(|(i, out)| {
            for k in 0..g.k.n {
                for l in 0..g.q.n {
                    let o = k * g.q.n + l;
                    out[o] = slice[i * block + o] + h * self.generator_at(slice, &stencils, i, k, l);
                }
            }
        });
    }

    /// Discrete `ℒ[v]` at `(t_n, x_i, k, q_l)`, `n < N_t`: backward time
    /// difference plus the generator applied to slice `n + 1`.
    pub fn apply_l(&self, v: &ValueField, n: usize, i: usize, k: usize, l: usize) -> f64 {
        let g = self.grid;
        assert!(n + 1 < g.t.n, "ℒ needs a later time slice");
        let t_next = g.t.value(n + 1);
        let stencils = self.stencils(t_next);
        let later = v.slice(n + 1);
        (v.get(n + 1, i, k, l) - v.get(n, i, k, l)) / g.t.step + self.generator_at(later, &stencils, i, k, l)
    }

    /// Discrete `ℳ[v] = U(x, q) + [v(k + Δ, q − Δ) − v(k, q)]/Δ`; needs `k < K`, `q > 0`.
    pub fn apply_m(&self, v: &ValueField, n: usize, i: usize, k: usize, l: usize) -> f64 {
        let g = self.grid;
        assert!(k + 1 < g.k.n && l >= 1, "ℳ needs k < K and q > 0");
        self.utility.value(g.x.value(i), g.q.value(l)) + (v.get(n, i, k + 1, l - 1) - v.get(n, i, k, l)) / g.delta()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::market::{Coefficients, JumpDistribution};
    use crate::qvi::grid::GridSpec;

    fn setup(params: &MarketParams) -> Grid {
        let spec = GridSpec { nt: 4, nx: 20, nk: 5, q_max: Some(8.0), ..GridSpec::default() };
        Grid::build(&spec, params).unwrap()
    }

    #[test]
    fn constants_are_annihilated() {
        let p = MarketParams::default();
        let g = setup(&p);
        let u = UtilityModel::default();
        let op = Operator::new(&g, &p, &u);
        let v = ValueField::from_fn(g, |_, _, _, _| 7.5);
        for &(i, k, l) in &[(0, 0, 0), (5, 2, 3), (20, 5, g.q.n - 1)] {
            assert!(op.apply_l(&v, 1, i, k, l).abs() < 1e-12);
        }
    }

    #[test]
    fn clamped_jump_sum() {
        let p = MarketParams {
            target: 1.0,
            nu: JumpDistribution::two_point(1.0, 1.0, 0.5).unwrap(),
            ..MarketParams::default()
        };
        let spec = GridSpec { nt: 4, nx: 20, nk: 4, q_max: Some(6.0), ..GridSpec::default() };
        let g = Grid::build(&spec, &p).unwrap();
        let u = UtilityModel::default();
        let op = Operator::new(&g, &p, &u);
        let v = ValueField::from_fn(g, |_, _, _, q| q);
        let per_unit = (1.0 / g.delta()).round() as usize;
        assert!(op.apply_l(&v, 0, 7, 1, per_unit + 3).abs() < 1e-12);
        assert!((op.apply_l(&v, 0, 7, 1, 0) - p.lambda / 2.0).abs() < 1e-12);
    }

    #[test]
    fn second_order_on_quadratics() {
        let p = MarketParams {
            coefficients: Coefficients::Geometric { mu: 0.03, sigma: 0.2 },
            lambda: 0.0,
            ..MarketParams::default()
        };
        let g = setup(&p);
        let u = UtilityModel::default();
        let op = Operator::new(&g, &p, &u);
        let v = ValueField::from_fn(g, |_, x, _, _| x * x);
        for i in 1..g.x.n - 1 {
            let x = g.x.value(i);
            let exact = 2.0 * 0.03 * x * x + 0.04 * x * x;
            let got = op.apply_l(&v, 2, i, 1, 1);
            assert!((got - exact).abs() < 1e-9 * x * x, "i={i}: {got} vs {exact}");
        }
    }

    #[test]
    fn obstacle_operator_on_linear_fields() {
        let p = MarketParams::default();
        let g = setup(&p);
        let u = UtilityModel::default();
        let op = Operator::new(&g, &p, &u);
        let zero = ValueField::from_fn(g, |_, _, _, _| 0.0);
        let lin_k = ValueField::from_fn(g, |_, _, k, _| -3.0 * k);
        let lin_q = ValueField::from_fn(g, |_, _, _, q| 3.0 * q);
        for &(i, k, l) in &[(3, 0, 1), (10, 4, 8), (19, 2, 7)] {
            let uu = u.value(g.x.value(i), g.q.value(l));
            assert!((op.apply_m(&zero, 0, i, k, l) - uu).abs() < 1e-12);
            assert!((op.apply_m(&lin_k, 0, i, k, l) - (uu - 3.0)).abs() < 1e-10);
            assert!((op.apply_m(&lin_q, 0, i, k, l) - (uu - 3.0)).abs() < 1e-10);
        }
    }

    #[test]
    fn stability_rate() {
        let p = MarketParams::default();
        let g = Grid::build(&GridSpec::default(), &p).unwrap();
        let u = UtilityModel::default();
        let op = Operator::new(&g, &p, &u);
        let dx: f64 = 12.5;
        // the last diffusive node sits one step inside x_max
        let expected = (0.2f64 * 387.5).powi(2) / (dx * dx) + 2.0;
        assert!((op.max_rate(0.0) - expected).abs() < 1e-9);
    }
}
