//! Sparse linear regression for serially dependent, high-dimensional data,
//! plus the surrounding apparatus: dependence-strength measurement, rate
//! and consistency diagnostics, data-generating processes, a Monte Carlo
//! harness, and a mixed-frequency nowcasting pipeline.
//!
//! Everything stochastic is keyed by explicit seeds through
//! [`rng::stream_rng`], so runs reproduce byte-for-byte at any thread
//! count.

pub mod conditions;
pub mod dependence;
pub mod dgp;
pub mod error;
pub mod experiments;
pub mod lasso;
pub mod midas;
pub mod mixedfreq;
pub mod problem;
pub mod rng;

mod linalg;

pub use error::{Error, Result};
pub use problem::{sample_covariance, vector_norm, Coefficients, CovarianceMatrix, RegressionProblem};
