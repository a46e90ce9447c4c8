//! Library side of the `minproj` command-line tool.

pub mod commands;
pub mod error;
pub mod manifest;

pub use error::{CliError, CliResult, EXIT_INPUT, EXIT_VIOLATION};
pub use manifest::{resolve_seed, RunManifest, DEFAULT_SEED};
