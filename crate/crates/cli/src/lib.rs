//! Experiment harness around `herd-core`: configuration, the epoch loop,
//! CSV/SVG artifacts, and checkpoint files. The `herd` binary is a thin
//! clap wrapper over this library so integration tests can drive training
//! runs in-process.

pub mod checkpoint;
pub mod config;
pub mod error;
pub mod harness;
pub mod logging;
pub mod plot;

pub use config::RunConfig;
pub use error::CliError;
pub use harness::{evaluate, train, EpochReport, RunResult, RunStats};
