//! The frequency-conditioned denoising network.
//!
//! Kernel-evaluator blocks turn the noise/noisy periodograms into
//! time-domain filter banks; the filters applier convolves them over the
//! noisy signal in cascade. All trainable parameters sit in the evaluators.

mod config;
pub mod network;
mod params;
pub mod weights;

use thiserror::Error;

use crate::tensor::TensorError;

pub use config::ModelConfig;
pub use network::{
    apply_filter_bank, denoise, filter_banks, filters_applier, forward, kernel_evaluator,
    FilterBank, ForwardPass, ParamVars,
};
pub use params::{closed_form_param_count, init_params, param_layout, Branch, ModelParams, ParamSpec};
pub use weights::{load_weights, save_weights, WeightsError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("invalid model config: {}", .0.join("; "))]
    InvalidConfig(Vec<String>),
    #[error("dimension error: {0}")]
    Dimension(String),
    #[error("parameter mismatch: {0}")]
    ParamMismatch(String),
    #[error(transparent)]
    Tensor(#[from] TensorError),
}
