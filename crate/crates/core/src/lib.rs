//! Simulation of a two-species phase segregation system with a nonsmooth
//! double-well potential, its vanishing-diffusion limit and the stop-operator
//! form of that limit.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod convexgraph;
pub mod diagnostics;
pub mod error;
pub mod grid;
pub mod hysteresis;
pub mod initdata;
pub mod limit_solver;
pub mod model;
pub mod monotone;
pub mod oracles;
pub mod sigma_solver;

pub use error::{Error, Result};
