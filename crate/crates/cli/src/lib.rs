//! Configuration, subcommands, and result serialization for the `aanewton` binary.

pub mod commands;
pub mod error;
pub mod manifest;
pub mod output;

pub use commands::{cmd_mms, cmd_run, cmd_sweep, exit_code, EXIT_CONFIG, EXIT_DIVERGED, EXIT_MAX_ITERS, EXIT_OK};
pub use error::CliError;
pub use manifest::RunManifest;
