//! The agent's compute core: dense layers, graph convolutions over the
//! network wiring, the branching dueling Q-head, its TD loss with exact
//! batch deduplication, Adam, and binary checkpoints. Reverse-mode
//! gradients are written by hand for exactly this layer set; everything is
//! f64 with fixed summation orders, so runs are bit-reproducible.

mod adam;
mod bdq;
pub mod check;
mod checkpoint;
mod dense;
mod graphconv;
mod tensor;

pub use adam::{clip_global_norm, soft_update, AdamState};
pub use bdq::{bdq_loss, bdq_targets, BdqArch, BdqCache, BdqLoss, BdqNetwork};
pub use checkpoint::{load_checkpoint, save_checkpoint};
pub use tensor::Tensor;

#[derive(Debug, thiserror::Error)]
pub enum NeuralError {
    #[error("non-finite values in {0}")]
    NonFinite(&'static str),
    #[error("discount must lie in [0, 1], got {0}")]
    BadDiscount(f64),
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
