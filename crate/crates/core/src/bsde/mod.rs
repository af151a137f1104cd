//! Forward BSDE recursion from the learnable initial value, the hedging
//! term Z = σ X ∂u/∂X, and the three-part training loss.

mod input;
mod loss;
mod models;
mod recurse;
mod train;

pub use input::PricingInput;
pub use loss::{loss_path, loss_price, loss_terminal, total_loss, LossBreakdown, LossWeights};
pub use models::{
    ConstantGenerator, ConstantValue, GeneratorModel, IdentityValue, LinearGenerator,
    NeuralGenerator, NeuralValue, ValueModel,
};
pub(crate) use models::push_value_row;
pub use recurse::{recurse, RecursionState};
pub use train::{batch_loss_and_grad, predict_prices, BatchGrad, BatchSetup, TrainBatch};
