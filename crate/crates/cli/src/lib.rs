//! Command-line front end for the AFC memory simulator: TOML-configured
//! scenario runs, parameter sweeps, bundled presets, and deterministic CSV
//! and report output.

pub mod config;
pub mod presets;
pub mod runner;
pub mod sweep;

use thiserror::Error;

/// Errors mapped onto the process exit codes: configuration problems exit
/// with 2, numerical-validity failures with 3, I/O failures with 4.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(#[from] config::ConfigError),
    #[error("numerical validity failure: {0}")]
    Numeric(String),
    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numeric(_) => 3,
            CliError::Io { .. } => 4,
        }
    }
}

/// Resolve a `run`/`sweep` argument: a bundled preset name first, otherwise
/// a path to a TOML file.
pub fn load_config(arg: &str) -> Result<config::RunConfig, CliError> {
    if let Some(text) = presets::find(arg) {
        return Ok(config::RunConfig::from_toml(text)?);
    }
    let text = std::fs::read_to_string(arg).map_err(|source| CliError::Io {
        path: arg.to_string(),
        source,
    })?;
    Ok(config::RunConfig::from_toml(&text)?)
}
