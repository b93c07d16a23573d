//! Equilibrium limit order book, market simulation and optimal execution.
//!
//! The crate is organised bottom-up:
//!
//! * [`lob`]: book shape, price impact and execution costs implied by a
//!   utility surface `U(x, q)`;
//! * [`market`]: price and order-flow simulation, strategies and the cost
//!   functionals `J`, `J⁰`, `J¹`;
//! * [`qvi`]: finite-difference solver for the value function `V(t, x, k, q)`;
//! * [`policy`]: inaction region, jump map, strategy synthesis and rollouts;
//! * [`verification`]: independent oracles and property checks;
//! * [`config`] and [`commands`]: batch driver used by the `lobexec` binary.

// `!(v > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod error;
pub mod lob;
pub mod market;
pub mod numerics;
pub mod policy;
pub mod qvi;
pub mod stats;
pub mod verification;

pub use error::{Error, Result};
pub use lob::{LobSnapshot, UtilityModel, UtilitySpec};
pub use market::{CostModel, MarketParams, MarketPath, PenaltyModel, Strategy};
