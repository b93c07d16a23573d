//! Finite-difference solver for the execution QVI
//! `min(ℒ[V], ℳ[V]) = 0` on a `(t, x, k, q)` grid.

mod field;
mod grid;
mod operators;
mod solver;

pub use field::{SchemeInfo, ValueField};
pub use grid::{Axis, Grid, GridSpec, Q_HEADROOM_FACTOR};
pub use operators::{Operator, Stencil};
pub use solver::{premium_scale, solve, solve_qvi, solve_qvi_with};
