//! Deep forward-backward SDE option pricing with volatility trajectories
//! and gated sentiment features.

pub mod autodiff;
pub mod bsde;
pub mod error;
pub mod evaluation;
pub mod features;
mod fsutil;
pub mod market;
pub mod nets;
pub mod option;
pub mod rng;
pub mod special;
pub mod synthetic;
pub mod trainer;
pub mod xai;

pub use error::{Error, Result};
pub use option::OptionKind;
