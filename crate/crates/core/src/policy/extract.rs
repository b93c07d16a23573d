use std::io::Write;

use rayon::prelude::*;

use super::region::{inaction_region, FieldObstacle, Region};
use crate::error::{Error, Result};
use crate::qvi::Grid;

/// Inaction regions on every `(t, x, s)` node of a solved grid, `s` running
/// over the `q` axis. The terminal slice is omitted because no trade is
/// possible at the horizon.
#[derive(Clone, Debug)]
pub struct Policy {
    grid: Grid,
    regions: Vec<Region>,
}

impl Policy {
    pub fn extract(src: &FieldObstacle<'_>) -> Policy {
        let grid = *src.field().grid();
        let nt = grid.t.n - 1;
        let regions = (0..nt * grid.x.n * grid.q.n)
            .into_par_iter()
            .map(|idx| {
                let m = idx % grid.q.n;
                let i = (idx / grid.q.n) % grid.x.n;
                let n = idx / (grid.q.n * grid.x.n);
                inaction_region(src, grid.t.value(n), grid.x.value(i), grid.q.value(m))
            })
            .collect();
        Policy { grid, regions }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn n_slices(&self) -> usize {
        self.grid.t.n - 1
    }

    pub fn region(&self, n: usize, i: usize, m: usize) -> Result<&Region> {
        if n >= self.n_slices() || i >= self.grid.x.n || m >= self.grid.q.n {
            return Err(Error::Domain(format!("policy node ({n}, {i}, {m}) outside the grid")));
        }
        Ok(&self.regions[(n * self.grid.x.n + i) * self.grid.q.n + m])
    }

    /// `φ(t_n, k, s)` at price node `i`.
    pub fn jump_map(&self, n: usize, i: usize, k: f64, m: usize) -> Result<f64> {
        Ok(self.region(n, i, m)?.jump_map(k))
    }

    /// One `t,x,q,interval_start,interval_end` row per inaction interval;
    /// `q` is the total `k + Q` the region was computed for.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "t,x,q,interval_start,interval_end")?;
        for n in 0..self.n_slices() {
            for i in 0..self.grid.x.n {
                for m in 0..self.grid.q.n {
                    for iv in &self.region(n, i, m)?.intervals {
                        writeln!(
                            out,
                            "{},{},{},{},{}",
                            self.grid.t.value(n),
                            self.grid.x.value(i),
                            self.grid.q.value(m),
                            iv.start,
                            iv.end
                        )?;
                    }
                }
            }
        }
        Ok(())
    }
}
