//! Dense classifier trained from scratch.
//!
//! Architecture: 3072 -> 1536 -> 768 -> 10 with ReLU after the two hidden
//! layers and an independent logistic sigmoid on each output unit. The loss
//! is binary cross-entropy against one-hot targets, averaged over batch and
//! classes, and parameters are updated with bias-corrected Adam.
//!
//! Parameters are stored as `f32`. Every routine is generic over the float
//! type so gradients can be checked on an `f64` copy of the model.

mod adam;
mod checkpoint;
mod model;
mod train;

pub use adam::{adam_step, adam_update, AdamConfig, AdamState};
pub use checkpoint::{
    load_checkpoint, load_checkpoint_with, loss_trace_csv, save_checkpoint, Checkpoint, CheckpointError,
    CHECKPOINT_MAGIC, CHECKPOINT_VERSION,
};
pub use model::{
    bce_loss, one_hot, Architecture, DenseLayer, ForwardCache, Gradients, Mlp, Scalar, PROB_CLAMP,
};
pub use train::{argmax, predict, predict_labels, train, train_matrix, TrainConfig, TrainError};

/// The classifier as trained and checkpointed.
pub type MlpModel = Mlp<f32>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum NnError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimMismatch { expected: usize, found: usize },
    #[error("shape mismatch: expected {expected:?}, found {found:?}")]
    ShapeMismatch { expected: Vec<usize>, found: Vec<usize> },
    #[error("input contains a non-finite value at row {row}, column {col}")]
    NonFiniteInput { row: usize, col: usize },
    #[error("forward cache does not belong to the current parameters")]
    StaleCache,
}
