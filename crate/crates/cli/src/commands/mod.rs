mod evaluate;
mod prepare;
mod train;

pub use evaluate::{cmd_attribute, cmd_evaluate, cmd_price, AttributionMethod};
pub use prepare::{cmd_bsm_sweep, cmd_features, cmd_simulate};
pub use train::{cmd_train, finetune_buckets, model_for, TrainStages};
