//! File formats, pipeline stages and the command-line interface on top
//! of `washmap-core`.

pub mod cli;
pub mod config;
pub mod error;
pub mod format;
pub mod stages;
pub mod synth;

pub use error::{CliError, ExitCode, Result};

pub fn run() -> ExitCode {
    cli::run()
}
