//! Oracles and metrics: the Bayes posterior `P(M | k)`, the expected
//! sum-squared-error functional it minimizes, an experiment checking that a
//! network trained on SSE converges to it, and classification / regression
//! metrics.

mod density;
mod metrics;
mod posterior;

use thiserror::Error;

pub use density::{ClassDensityPair, Density, Grid};
pub use metrics::{classification_metrics, regression_metrics, roc_curve, ClassificationMetrics, EvalReport, RocPoint};
pub use posterior::{
    bayes_posterior_oracle, expected_sse, posterior_convergence_experiment, sse_pointwise_derivative,
    tabulate_posterior, PosteriorReport, MIN_GRID_COVERAGE,
};

use crate::neural::NeuralError;

#[derive(Debug, Error, PartialEq)]
pub enum EvalError {
    #[error("invalid density: {0}")]
    InvalidDensity(String),
    #[error("posterior undefined at k = {0}: both weighted densities vanish")]
    Undefined(f64),
    #[error("grid [{lo}, {hi}] covers only {mass:.6} of a density's mass")]
    Coverage { lo: f64, hi: f64, mass: f64 },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error(transparent)]
    Neural(#[from] NeuralError),
}

pub type Result<T> = std::result::Result<T, EvalError>;
