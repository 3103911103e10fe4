//! Benchmark POMDPs and their option sets.

use thiserror::Error;

pub mod dupinput;
pub mod gathering;
pub mod treemaze;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EnvError {
    #[error("step called on a finished episode")]
    StepAfterDone,
    #[error("step called before reset")]
    NotReset,
    #[error("action {0} is outside the action space")]
    InvalidAction(usize),
    #[error("option-level action {0} is not available at the current location")]
    UnavailableOption(usize),
}
