//! Three chained networks trained phase by phase.
//!
//! Phase `j` sees `[O_{j-1} ∥ I_{j-1} ∥ p_j]`: the previous network's output,
//! the previous network's full input, then the phase's fresh features.
//! Earlier phases are frozen while later ones train.

mod model;
mod train;

use thiserror::Error;

pub use crate::synthesis::PhaseId;
pub use model::{build_phase_input, NestedModel, Prediction, DEFAULT_THRESHOLD, NESTED_FORMAT_VERSION};
pub use train::{
    retrain_phase_three, train_nested, train_novelty, LogRow, NestedConfig, PhaseConfig, PhaseSummary, TrainingLog,
};

use crate::neural::NeuralError;
use crate::synthesis::SynthesisError;

#[derive(Debug, Error)]
pub enum NestedError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("field `{field}`: {message}")]
    Schema { field: String, message: String },
    #[error("unsupported nested model format_version {0}")]
    Version(u64),
    #[error(transparent)]
    Synthesis(#[from] SynthesisError),
    #[error(transparent)]
    Neural(#[from] NeuralError),
}

pub type Result<T> = std::result::Result<T, NestedError>;
