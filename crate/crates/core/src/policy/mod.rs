//! Masked policy network, value baseline, policy-gradient loss and Adam.
//!
//! One network serves both the top-level and the option policies:
//!
//! ```text
//! h = tanh(W1 [x; ω] + b1)
//! ŷ = σ(W2 h + b2) ∘ mask
//! y = ŷ / Σ ŷ
//! ```
//!
//! where `ω` is the one-hot of the executing option (all zero at top level).

use thiserror::Error;

mod adam;
mod loss;
mod net;

pub use adam::{adam_step, AdamConfig, AdamState};
pub use loss::{
    grad_check, pg_loss, pg_loss_and_grads, pg_loss_and_grads_regularised, value_grad_check,
    value_loss_and_grads, value_update,
};
pub use net::{one_hot, Dense, Gradients, Parameters, PolicyNet, ValueNet};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PolicyError {
    #[error("mask has no admissible entry")]
    DegenerateMask,
    #[error("{what}: expected length {expected}, found {found}")]
    DimensionMismatch { what: &'static str, expected: usize, found: usize },
    #[error("inputs are misaligned: {0}")]
    MisalignedInput(&'static str),
    #[error("parameter and gradient shapes differ")]
    ShapeMismatch,
    #[error("chosen entry {0} has zero probability")]
    ZeroProbabilityChoice(usize),
}
