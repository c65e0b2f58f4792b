//! Command-line pipelines: build, sample, decode and analyse the
//! transversal CNOT memory experiment with reproducible configs.

pub mod cli;
pub mod commands;
pub mod config;
pub mod error;

pub use cli::{execute, main_with, Cli};
pub use commands::{Format, Manifest, SweepConfig};
pub use config::RunConfig;
pub use error::{CliError, Result};
