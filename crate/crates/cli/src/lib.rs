//! Command-line front end of the `nonholonomic` engine.
//!
//! Every command is described by a [`RunConfig`]. Flags and `run --config`
//! files both produce one; [`run`] resolves it, executes it and renders the
//! artifact with the resolved config embedded.

pub mod args;
pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use std::path::Path;

pub use config::{CommandKind, LoopRef, OutputFormat, RunConfig};
pub use error::{CliError, EXIT_NUMERIC, EXIT_OK, EXIT_VALIDATION};

/// Resolved config together with the rendered artifact.
#[derive(Clone, Debug)]
pub struct Artifact {
    pub config: RunConfig,
    pub text: String,
}

/// Resolves and executes `config`, returning the rendered artifact without
/// writing it anywhere.
pub fn run(config: RunConfig, base: &Path) -> Result<Artifact, CliError> {
    let config = config.resolve()?;
    let report = commands::execute(&config, base)?;
    let text = output::render(&config, &report);
    Ok(Artifact { config, text })
}

/// Like [`run`], then writes the artifact to the configured output path
/// (resolved against `base`) or returns it for standard output.
pub fn run_and_write(config: RunConfig, base: &Path) -> Result<Option<String>, CliError> {
    let art = run(config, base)?;
    match &art.config.output_path {
        Some(p) => {
            std::fs::write(config::resolve_path(base, p), &art.text)?;
            Ok(None)
        }
        None => Ok(Some(art.text)),
    }
}
