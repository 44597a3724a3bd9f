//! Direction-conditioned waveform separator: a strided-convolution
//! encoder–decoder with a bidirectional LSTM bottleneck, trained with an
//! L1 waveform loss. Forward and backward passes are hand-written and
//! deterministic for a fixed seed and thread count.

// Guards written as `!(x > 0.0)` also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod checkpoint;
pub mod config;
pub mod gradcheck;
pub mod infer;
pub mod input;
pub mod lstm;
pub mod model;
pub mod ops;
pub mod train;

pub use checkpoint::{Checkpoint, CheckpointHeader};
pub use config::{Mode, ModelConfig, ParamLayout};
pub use gradcheck::{gradient_check, GradCheckReport};
pub use infer::{separate, separate_many, NetworkMethod};
pub use input::{assemble_input, perturb_target, scale_direction, NetInput, ScaledDirection};
pub use model::{backward, forward, forward_cached, ModelParams};
pub use ops::Tensor;
pub use train::{evaluate_loss, loss_l1, train, Adam, AdamConfig, History, PlateauScheduler, TrainConfig};

pub type ModelParamsF32 = ModelParams<f32>;
pub type ModelParamsF64 = ModelParams<f64>;
