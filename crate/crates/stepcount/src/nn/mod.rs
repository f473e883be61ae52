//! Minimal differentiable-computation layer: tensors, forward/backward ops,
//! Adam, plateau scheduler, and checkpoint serialization.

pub mod checkpoint;
pub mod ops;
pub mod optim;
pub mod tensor;

pub use checkpoint::{load_checkpoint, save_checkpoint, CheckpointHeader};
pub use optim::{AdamState, PlateauScheduler};
pub use tensor::Tensor;
