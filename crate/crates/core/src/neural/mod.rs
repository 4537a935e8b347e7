//! Fully connected feed-forward networks built from scratch.
//!
//! Each neuron computes `O_j = f(Σ_i w_ij x_i + b_j)`; layers feed strictly
//! forward. Training minimizes sum-squared error by online gradient descent.
//! A network without hidden layers is a generalized linear model: with a
//! sigmoid output its 0.5 level set is the hyperplane `w·x + b = 0`.

mod model_file;
mod network;
mod train;
mod transfer;

use thiserror::Error;

pub use model_file::{deserialize, from_json_value, serialize, to_json_value, MODEL_FORMAT_VERSION};
pub use network::{backprop_gradients, forward, sse_loss, ForwardPass, Gradients, Network, NetworkSpec};
pub use train::{grow_hidden_until_adequate, train, train_monitored, GrowthOutcome, Sample, TrainConfig, TrainOutcome};
pub use transfer::TransferKind;

#[derive(Debug, Error, PartialEq)]
pub enum NeuralError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("invalid network spec: {0}")]
    InvalidSpec(String),
    #[error("invalid training config: {0}")]
    InvalidConfig(String),
    #[error("training diverged at epoch {epoch}: loss is not finite")]
    Divergence { epoch: usize },
    #[error("model file field `{field}`: {message}")]
    Schema { field: String, message: String },
    #[error("unsupported model format_version {0}")]
    Version(u64),
}

pub type Result<T> = std::result::Result<T, NeuralError>;
