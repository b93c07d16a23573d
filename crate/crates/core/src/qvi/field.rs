use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::grid::{Axis, Grid};
use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"LOBV";
const VERSION: u32 = 1;

/// How a field was produced and the tolerances that go with it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SchemeInfo {
    /// Explicit sub-steps between stored slices.
    pub substeps: usize,
    /// Sub-step length.
    pub substep: f64,
    /// Sub-step times the largest diagonal rate; at most 1.
    pub cfl_ratio: f64,
    /// See [`Grid::mesh_measure`].
    pub mesh_measure: f64,
    /// `K·max_x (U(x,0) − x) + η·K²`; the part of the value not explained by `(K − k)·x`.
    pub premium_scale: f64,
    /// `mesh_measure · premium_scale`.
    pub tolerance: f64,
}

impl SchemeInfo {
    pub fn unsolved() -> SchemeInfo {
        SchemeInfo { substeps: 0, substep: 0.0, cfl_ratio: 0.0, mesh_measure: 0.0, premium_scale: 0.0, tolerance: 0.0 }
    }
}

/// Samples of `V(t, x, k, q)` on a [`Grid`], row-major in `(t, x, k, q)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ValueField {
    grid: Grid,
    data: Vec<f64>,
    scheme: SchemeInfo,
}

impl ValueField {
    pub fn new(grid: Grid, data: Vec<f64>, scheme: SchemeInfo) -> Result<Self> {
        if data.len() != grid.len() {
            return Err(Error::Domain(format!("field has {} samples, grid needs {}", data.len(), grid.len())));
        }
        Ok(ValueField { grid, data, scheme })
    }

    /// Field sampled from `f(t, x, k, q)`.
    pub fn from_fn<F: Fn(f64, f64, f64, f64) -> f64>(grid: Grid, f: F) -> Self {
        let mut data = Vec::with_capacity(grid.len());
        for n in 0..grid.t.n {
            let t = grid.t.value(n);
            for i in 0..grid.x.n {
                let x = grid.x.value(i);
                for k in 0..grid.k.n {
                    let kv = grid.k.value(k);
                    for l in 0..grid.q.n {
                        data.push(f(t, x, kv, grid.q.value(l)));
                    }
                }
            }
        }
        ValueField { grid, data, scheme: SchemeInfo::unsolved() }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn scheme(&self) -> &SchemeInfo {
        &self.scheme
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn slice(&self, n: usize) -> &[f64] {
        let len = self.grid.slice_len();
        &self.data[n * len..(n + 1) * len]
    }

    #[inline]
    pub fn get(&self, n: usize, i: usize, k: usize, l: usize) -> f64 {
        self.data[self.grid.index(n, i, k, l)]
    }

    /// `max |v|` over the field.
    pub fn value_scale(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Multilinear interpolation; coordinates outside the grid are clamped.
    pub fn interpolate(&self, t: f64, x: f64, k: f64, q: f64) -> f64 {
        self.interpolate_checked(t, x, k, q).0
    }

    /// As [`interpolate`](Self::interpolate), also reporting whether any
    /// coordinate had to be clamped.
    pub fn interpolate_checked(&self, t: f64, x: f64, k: f64, q: f64) -> (f64, bool) {
        let g = &self.grid;
        let locs = [g.t.locate(t), g.x.locate(x), g.k.locate(k), g.q.locate(q)];
        let outside = locs.iter().any(|l| l.2);
        let ns = [g.t.n, g.x.n, g.k.n, g.q.n];
        let mut acc = 0.0;
        for corner in 0..16u32 {
            let mut w = 1.0;
            let mut idx = [0usize; 4];
            for d in 0..4 {
                let (i, f, _) = locs[d];
                let up = corner >> d & 1 == 1;
                if up {
                    if ns[d] == 1 {
                        w = 0.0;
                        break;
                    }
                    w *= f;
                    idx[d] = i + 1;
                } else {
                    w *= 1.0 - f;
                    idx[d] = i;
                }
            }
            if w != 0.0 {
                acc += w * self.get(idx[0], idx[1], idx[2], idx[3]);
            }
        }
        (acc, outside)
    }

    /// Binary layout: `LOBV`, `u32` version, four `u64` node counts, then
    /// `(min, step)` per axis, the scheme record and the samples, all
    /// little-endian `f64` in row-major `(t, x, k, q)` order.
    pub fn write_binary<W: Write>(&self, mut out: W) -> Result<()> {
        out.write_all(MAGIC)?;
        out.write_all(&VERSION.to_le_bytes())?;
        let axes = [self.grid.t, self.grid.x, self.grid.k, self.grid.q];
        for a in &axes {
            out.write_all(&(a.n as u64).to_le_bytes())?;
        }
        for a in &axes {
            out.write_all(&a.min.to_le_bytes())?;
            out.write_all(&a.step.to_le_bytes())?;
        }
        let s = &self.scheme;
        for v in [s.substeps as f64, s.substep, s.cfl_ratio, s.mesh_measure, s.premium_scale, s.tolerance] {
            out.write_all(&v.to_le_bytes())?;
        }
        let mut buf = Vec::with_capacity(self.data.len() * 8);
        for v in &self.data {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        out.write_all(&buf)?;
        Ok(())
    }

    pub fn read_binary<R: Read>(mut input: R) -> Result<Self> {
        let mut magic = [0u8; 4];
        input.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(Error::Parse("not a value-field file".into()));
        }
        let mut b4 = [0u8; 4];
        input.read_exact(&mut b4)?;
        let version = u32::from_le_bytes(b4);
        if version != VERSION {
            return Err(Error::Parse(format!("unsupported value-field version {version}")));
        }
        let mut b8 = [0u8; 8];
        let mut read_u64 = |r: &mut R| -> Result<u64> {
            r.read_exact(&mut b8)?;
            Ok(u64::from_le_bytes(b8))
        };
        let mut dims = [0usize; 4];
        for d in &mut dims {
            *d = read_u64(&mut input)? as usize;
        }
        let read_f64 = |r: &mut R| -> Result<f64> {
            let mut b = [0u8; 8];
            r.read_exact(&mut b)?;
            Ok(f64::from_le_bytes(b))
        };
        let mut axes = [Axis { min: 0.0, step: 0.0, n: 0 }; 4];
        for (a, &n) in axes.iter_mut().zip(&dims) {
            if n == 0 {
                return Err(Error::Parse("axis with no nodes".into()));
            }
            a.n = n;
            a.min = read_f64(&mut input)?;
            a.step = read_f64(&mut input)?;
        }
        let mut s = [0.0; 6];
        for v in &mut s {
            *v = read_f64(&mut input)?;
        }
        let scheme = SchemeInfo {
            substeps: s[0] as usize,
            substep: s[1],
            cfl_ratio: s[2],
            mesh_measure: s[3],
            premium_scale: s[4],
            tolerance: s[5],
        };
        let grid = Grid { t: axes[0], x: axes[1], k: axes[2], q: axes[3] };
        let mut raw = Vec::new();
        input.read_to_end(&mut raw)?;
        if raw.len() != grid.len() * 8 {
            return Err(Error::Parse(format!("expected {} samples, found {} bytes", grid.len(), raw.len())));
        }
        let data = raw.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes"))).collect();
        ValueField::new(grid, data, scheme)
    }

    /// Long-format table `k,q,v` at time slice `n` and price node `i`.
    pub fn write_slice_csv<W: Write>(&self, mut out: W, n: usize, i: usize) -> Result<()> {
        if n >= self.grid.t.n || i >= self.grid.x.n {
            return Err(Error::Domain(format!("slice ({n}, {i}) outside the grid")));
        }
        writeln!(out, "k,q,v")?;
        for k in 0..self.grid.k.n {
            for l in 0..self.grid.q.n {
                writeln!(out, "{},{},{}", self.grid.k.value(k), self.grid.q.value(l), self.get(n, i, k, l))?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::market::MarketParams;
    use crate::qvi::grid::GridSpec;

    fn small_grid() -> Grid {
        let spec = GridSpec { nt: 2, nx: 4, nk: 3, ..GridSpec::default() };
        Grid::build(&spec, &MarketParams::default()).unwrap()
    }

    #[test]
    fn interpolation_is_exact_on_multilinear_functions() {
        let g = small_grid();
        let f = |t: f64, x: f64, k: f64, q: f64| 1.0 + 2.0 * t - 0.5 * x + 3.0 * k * q + t * x * k;
        let v = ValueField::from_fn(g, f);
        for &(t, x, k, q) in &[(0.3, 110.0, 1.2, 4.4), (0.99, 26.0, 4.9, 17.0), (0.0, 25.0, 0.0, 0.0)] {
            let (got, out) = v.interpolate_checked(t, x, k, q);
            assert!(!out);
            assert!((got - f(t, x, k, q)).abs() < 1e-9, "{got} vs {}", f(t, x, k, q));
        }
        assert!(v.interpolate_checked(0.5, 500.0, 1.0, 1.0).1);
    }

    #[test]
    fn binary_round_trip() {
        let g = small_grid();
        let v = ValueField::from_fn(g, |t, x, k, q| t + x * 1e-3 - k + q * q);
        let mut buf = Vec::new();
        v.write_binary(&mut buf).unwrap();
        assert_eq!(&buf[..4], b"LOBV");
        let back = ValueField::read_binary(buf.as_slice()).unwrap();
        assert_eq!(back, v);
        assert!(ValueField::read_binary(&buf[..buf.len() - 8]).is_err());
    }

    #[test]
    fn slice_csv_shape() {
        let g = small_grid();
        let v = ValueField::from_fn(g, |_, _, k, q| k + q);
        let mut buf = Vec::new();
        v.write_slice_csv(&mut buf, 1, 2).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 1 + g.k.n * g.q.n);
        assert!(text.starts_with("k,q,v\n0,0,0\n"));
    }
}
