//! Composite loss, AdaMax and the epoch loop with on-the-fly mixing.

mod adamax;
mod checkpoint;
mod loss;
mod trainer;

use thiserror::Error;

use crate::data::DataError;
use crate::model::{ModelError, WeightsError};
use crate::tensor::TensorError;

pub use adamax::{adamax_step, AdamaxHyper, OptimizerState, ADAMAX_EPSILON};
pub use checkpoint::{decode_checkpoint, encode_checkpoint, load_checkpoint, Checkpoint};
pub use loss::{logcosh, loss, loss_value, rrmse_f, rrmse_t, LossWeights};
pub use trainer::{
    history_csv, params_checksum, train, PreparedExample, TrainConfig, TrainOutcome, TrainRecord,
    Trainer,
};

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("degenerate target: {0}")]
    DegenerateTarget(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("invalid training config: {}", .0.join("; "))]
    InvalidConfig(Vec<String>),
    #[error("config mismatch: {0}")]
    ConfigMismatch(String),
    #[error("non-finite loss at epoch {epoch}, step {step}")]
    NonFinite { epoch: usize, step: usize },
    #[error(transparent)]
    Tensor(#[from] TensorError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Weights(#[from] WeightsError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}
