//! Two-stage optimisation: pretraining on all contracts with sentiment
//! disabled, then per-(class, side) fine-tuning of the heads and the gated
//! sentiment path.

mod optim;
mod stage;

pub use optim::{adamw_step, clip_gradients, lr_at, AdamConfig, AdamState};
pub use stage::{
    run_stage, trainable_masks, write_trace, BackbonePolicy, GatePolicy, Stage, StageSpec,
    TraceRow, TrainConfig,
};
