//! Means of positive definite matrices (Cartan, log-Euclidean, Wasserstein,
//! power and Lim–Palfia means), the metrics behind them, majorization checks on
//! their spectra, and a harness that tests the known inequalities between them
//! on random ensembles.

// `!(x > 0.0)` style comparisons are used on purpose to reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod majorization;
pub mod means;
pub mod metrics;
pub mod spd;
pub mod verify;

pub use error::{Error, Result};
