//! millrun: a production-planning toolkit for a single-product plant.
//!
//! The pieces, bottom up:
//!
//! - [`model`]: machines, orders, and plant configuration.
//! - [`demand`]: unmet-demand ratio, normal fit, Anderson-Darling check,
//!   tail probabilities.
//! - [`forecast`]: six backtested model families ranked by MAPE over a
//!   deterministic hyperparameter grid.
//! - [`capacity`]: nominal capacity and the startup-loss line.
//! - [`schedule`]: the exact evaluator for the order-to-machine assignment
//!   model with due-date slack and warehouse occupancy constraints.
//! - [`solver`]: an exhaustive oracle plus greedy and local-search
//!   heuristics, all deterministic.
//! - [`scenario`]: demand segmentation, warehouse sweeps, and the
//!   critical-demand bisection.
//! - [`io`] / [`cli`]: file formats and the `millrun` binary.

pub mod capacity;
pub mod cli;
pub mod demand;
pub mod error;
pub mod forecast;
pub mod io;
pub mod model;
pub mod scenario;
pub mod schedule;
pub mod solver;

pub use error::{Error, Result};
