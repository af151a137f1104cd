//! Attribution of pricing gains to the volatility trajectory and to the
//! sentiment channel.

mod ablation;
mod ig;
mod view;

pub use ablation::{
    arch_advantage, evaluate_ablation, shapley_two_player, AblationConfig, RvMode, SentMode,
    ShapleyResult, CONSTANT_SIGMA,
};
pub use ig::{integrated_gradients, AttributionResult, FeatureGroup, IG_STEPS};
pub use view::{LinearProbe, ModelView, PriceView};
