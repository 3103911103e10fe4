//! Standard-library side of the `ooi` workspace: experiment configuration,
//! the seeded multi-run harness, CSV curves, FSC fixtures and parameter
//! checkpoints.

pub mod checkpoint;
pub mod config;
pub mod fixture;
pub mod harness;

pub use config::{AgentKind, ConfigError, EnvConfig, ExperimentConfig};
pub use harness::{aggregate, emit_csv, read_csv, run_experiment, CurvePoint, HarnessError, RunRecord};
