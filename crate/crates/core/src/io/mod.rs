//! Configuration files, CSV schemas, run manifests and the command
//! implementations behind the `ioncool` binary.

mod cli;
mod commands;
mod config;
mod data;
mod manifest;

pub use cli::{run, Cli, Command};
pub use commands::*;
pub use config::{ExperimentConfig, CONFIG_ENV, CONFIG_KEYS};
pub use data::*;
pub use manifest::{manifest_path, RunManifest, TOOLKIT_VERSION};
