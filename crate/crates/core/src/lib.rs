//! Estimating the number of factors in high-dimensional, high-frequency data.
//!
//! The crate simulates a continuous-time factor panel observed on an
//! intraday grid, computes realized covariance and correlation spectra
//! through their Gram-matrix equivalents, and applies five rank estimators
//! to the spectra. On top of that sit Monte Carlo drivers reproducing the
//! reference table and figure experiments, and empirical scaling studies
//! that compare realized-covariance error norms against their theoretical
//! envelopes.
//!
//! Layout:
//! - [`processes`]: stochastic ingredients (stable and tempered-stable
//!   subordinators, normal tempered-stable increments, stochastic-volatility
//!   factors, sparse loadings, cross-sectionally mixed idiosyncratic noise).
//! - [`spectra`]: realized covariance/correlation and their eigenvalue
//!   spectra, computed on the cheaper Gram side.
//! - [`estimators`]: the five rank estimators and their shared kernels.
//! - [`montecarlo`]: replication driver, experiment aggregation, parameter
//!   sweeps.
//! - [`bounds`]: empirical checks of concentration and spectral-scaling
//!   envelopes.
//! - [`presets`]: named configurations for every reference table and figure.

pub mod bounds;
pub mod error;
pub mod estimators;
pub mod montecarlo;
pub mod presets;
pub mod processes;
pub mod rng;
pub mod spectra;

pub use error::{Error, Result};

/// Increment panel: rows are components, columns are observation intervals.
pub type IncrementMatrix = nalgebra::DMatrix<f64>;
