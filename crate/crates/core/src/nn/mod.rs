//! Digital backend: layers with hand-written backward passes, the sensing
//! model, Adam, finite-difference checks and checkpoints.

pub mod adam;
pub mod checkpoint;
pub mod gradcheck;
pub mod layers;
pub mod model;
pub mod tensor;
pub mod train;

pub use adam::{cosine_lr, Adam, AdamConfig};
pub use checkpoint::{read_checkpoint, write_checkpoint, Checkpoint, NamedTensor, CHECKPOINT_VERSION};
pub use gradcheck::{grad_check, grad_check_against, relative_error, GradCheckReport, ParamCheck};
pub use layers::Padding;
pub use model::{BatchStats, FrontEnd, Grads, Model, ModelSpec, Param};
pub use tensor::Tensor;
pub use train::TrainState;
