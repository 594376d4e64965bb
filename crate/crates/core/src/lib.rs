//! Laboratory for a full-duplex access point serving one uplink and one
//! downlink user drawn from a Poisson point process.
//!
//! The crate pairs two independent engines over the same system model:
//!
//! * [`analytic`] evaluates the outage-probability and ergodic-rate
//!   expressions (general integrals, interference-limited series, bounds
//!   and high-SNR asymptotics) on top of the numerical kernels in
//!   [`specfun`];
//! * [`montecarlo`] estimates the same quantities by simulating
//!   [`geometry`] realizations and Rayleigh fading, with deterministic
//!   parallel execution.
//!
//! Both share the scenario definition and per-realization SINR formulas in
//! [`model`].

pub mod analytic;
pub mod error;
pub mod geometry;
pub mod model;
pub mod montecarlo;
pub mod specfun;

pub use error::{Error, Result};
pub use model::{HdCondition, HdPowerPolicy, Link, Scenario, ScenarioConfig, Selection};
pub use specfun::{EvalPath, SeriesEval};
