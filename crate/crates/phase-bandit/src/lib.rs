//! Bandit phase retrieval: simulation, policies, estimation and analysis.
//!
//! The environment hides a parameter vector `theta_star` of norm `r <= 1`.
//! Each round the learner plays an action `a` in the closed unit ball and
//! observes `<a, theta_star>^2` plus Gaussian noise, so the reward carries no
//! sign information and the optimal action is `theta_star / r` up to sign.
//!
//! The crate provides:
//!
//! - [`core`]: environment, action geometry, sphere sampling, regret
//!   accounting and a budgeted play session with per-round auditing.
//! - [`estimator`]: the constrained non-convex least-squares estimator for
//!   the quartic loss, spectral initialization, feasible-set projection, a
//!   brute-force grid oracle and radius estimation.
//! - [`policies`]: the adaptive warm-start procedure, explore-then-commit,
//!   their composition, a non-adaptive uniform baseline and prediction rules.
//! - [`analysis`]: closed-form sphere moments, information gain and ratio,
//!   concentration diagnostics, lower-bound radii and power-law fits.
//! - [`harness`]: seeded, reproducible experiment sweeps with CSV and SVG
//!   output, exposed through the `phase-bandit` binary.

pub mod analysis;
pub mod core;
pub mod estimator;
pub mod harness;
pub mod linalg;
pub mod policies;

pub use crate::core::{Action, BanditSession, Environment, Phase, RngState, Trajectory};
pub use crate::policies::PolicyOutcome;
