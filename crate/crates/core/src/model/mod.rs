//! LSTM regressor trained from scratch: forward pass, backpropagation
//! through time, Adam with exponential learning-rate decay.

mod adam;
mod lstm;
mod sequence;
mod snapshot;
mod train;

use thiserror::Error;

pub use adam::{adam_step, decayed_learning_rate, AdamHyper, AdamState};
pub use lstm::{glorot_limit, glorot_uniform, ForwardCache, LstmModel};
pub use sequence::{build_sequences, Sequence, SequenceSet, Standardizer};
pub use snapshot::{ModelSnapshot, SnapshotManifest, SNAPSHOT_MAGIC};
pub use train::{predict, train, TrainConfig};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("forward cache does not match the current model parameters")]
    StaleCache,
    #[error("non-finite gradient in parameter block {block}")]
    NonFiniteGradient { block: String },
    #[error("training diverged at epoch {epoch}, step {step}")]
    Diverged { epoch: usize, step: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("no training sequences")]
    EmptySequences,
    #[error("snapshot: {0}")]
    Snapshot(String),
}
