//! Options with option-observation initiation sets (OOIs).
//!
//! An option may only be started when the pair (current observation,
//! previously executed option) lies in its initiation set. This crate holds
//! the allocation-only parts of the engine:
//!
//! - [`options`]: initiation sets, availability, masks and the episode executor.
//! - [`fsc`]: finite state controllers, their compilation into OOI option
//!   sets and exact distribution-trace oracles.
//! - [`policy`]: the masked one-hidden-layer policy network, its value
//!   baseline, the policy-gradient loss and Adam.
//! - [`learner`]: the agent gluing the network to an option set.
//! - [`envs`]: TreeMaze, modified DuplicatedInput and option-level Object
//!   Gathering, with their option sets and scripted oracles.
//! - [`seed`]: deterministic stream derivation for multi-run experiments.
//!
//! IO, configuration and the command line live in the `ooi` crate.

#![no_std]

extern crate alloc;

pub mod envs;
pub mod fsc;
pub mod learner;
pub mod options;
pub mod policy;
pub mod scripted;
pub mod seed;

mod sample;

pub use options::{
    available_options, build_mask, discounted_returns, run_episode, Agent, Environment,
    InitiationSet, MaskContext, MaskVector, Observation, OptionId, OptionSpec, OptionsError,
    Predecessor, Step, Trajectory,
};
pub use sample::sample_index;
