//! Doubly nonlinear degenerate diffusion `rho(x) u_t = div(u^{m-1} |grad u|^{p-2} grad u)`
//! on rotationally symmetric manifolds with a radial, decaying density.
//!
//! * [`geometry`]: volume, isoperimetric and density-derived characteristic functions.
//! * [`theory`]: assumption checks, regime classification and predicted rates.
//! * [`solver`]: conservative radial finite-volume integrator.
//! * [`inequalities`]: empirical constants of the functional inequalities.
//! * [`harness`]: experiments comparing simulations with predictions.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod config;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod inequalities;
pub mod solver;
pub mod theory;

pub use config::ProblemConfig;
pub use error::{Error, Result};
