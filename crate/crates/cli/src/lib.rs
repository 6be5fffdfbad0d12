//! Config-driven front end for the checks in `schauder-core`.

pub mod config;
pub mod emit;
pub mod error;
pub mod run;

pub use config::{parse_config, Command, JobConfig, COMMANDS};
pub use emit::{emit_report, Format};
pub use error::CliError;
pub use run::{exit_status, run_command, RunOptions};
