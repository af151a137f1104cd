//! Scalar-graph automatic differentiation.
//!
//! [`Tape`] records a Wengert list of scalar operations and computes reverse
//! mode gradients with a single descending sweep. [`Dual`] is a plain
//! forward-mode number. [`TapeDual`] carries a forward tangent whose every
//! operation is itself recorded on the tape, so a directional derivative such
//! as `du/dX` is an ordinary tape node and the outer reverse sweep
//! differentiates through it (forward-over-reverse).
//!
//! The [`Scalar`] trait abstracts over all of these so that model code can be
//! written once and evaluated plainly, in forward mode, in reverse mode or
//! nested.

mod dual;
mod scalar;
mod tape;

pub use dual::Dual;
pub use scalar::Scalar;
pub use tape::{directional_value_and_grad, Gradients, Node, NodeId, Op, Tape, TapeDual, Var};
