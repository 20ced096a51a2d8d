//! Distribution-free bounds on the probability that an individual benefits
//! from treatment, `θ(δ) = P(Y(1) − Y(0) > δ)`.
//!
//! The potential outcomes `Y(0)` and `Y(1)` are never observed jointly, so
//! `θ(δ)` is not identified. What is identified are the two marginal CDFs,
//! and from them the Makarov bounds `θ^L(δ) ≤ θ(δ) ≤ θ^U(δ)`. This crate
//! estimates those bounds and attaches finite-sample margins of error:
//!
//! * [`ecdf`]: empirical CDFs and the one-sample DKW margin.
//! * [`makarov`]: exact plug-in bounds from two empirical CDFs, plus
//!   numerical population bounds for analytic marginals.
//! * [`rct`]: the two-sample margin for randomized trials, confidence bands
//!   over a threshold grid, and power-analysis inversions.
//! * [`regression`]: polynomial feature maps and per-arm least squares.
//! * [`conditional`]: covariate-conditional bounds from regression residuals
//!   and the linear-Gaussian uniform margin.
//! * [`numerics`]: normal CDF, chi-squared quantile, smallest eigenvalue.
//! * [`simulation`]: seeded synthetic worlds with known truth.
//! * [`cli`]: the `pibt` command-line front end.

pub mod cli;
pub mod conditional;
pub mod ecdf;
mod error;
pub mod makarov;
pub mod numerics;
pub mod rct;
pub mod regression;
pub mod simulation;

pub use error::{Arm, PibtError, Result};
