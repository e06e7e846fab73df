//! Inference for two-cause competing-risks exponential lifetimes observed
//! under generalized progressive hybrid censoring: closed-form MLEs, the
//! exact finite-sample distribution of each MLE as a signed shifted-gamma
//! mixture, exact/bootstrap/asymptotic confidence intervals, conjugate
//! Beta-Gamma Bayesian inference, and a Monte Carlo experiment harness.

pub mod bayes;
pub mod data;
pub mod error;
pub mod estimation;
pub mod exact;
pub mod experiments;
pub mod intervals;
pub mod io;
pub mod numeric;
pub mod rngs;
pub mod sample;
pub mod scheme;

pub use error::{Error, Result};
