//! Value and generator networks: per-variable expansion, gated sentiment
//! embedding, adaptive-activation backbone and output heads.

mod aaf;
mod arch;
mod batch;
pub mod checkpoint;
mod init;
mod model;
mod reference;

pub use aaf::{aaf, AafWeights, AAF_INIT, AAF_NORM_FLOOR};
pub use arch::{
    generator_channel, value_channel, Architecture, NetConfig, NetKind, Segment, SENTIMENT_DIM,
};
pub use batch::{BackwardPlan, DropoutKey, Forward, ForwardOptions, InputGrads, NetInputs};
pub use model::PricingModel;

/// Five sentiment features in the fixed per-class order.
pub type SentimentVector = [f64; SENTIMENT_DIM];
