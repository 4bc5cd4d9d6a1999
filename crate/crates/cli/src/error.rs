use std::path::Path;

use serde::Serialize;
use thiserror::Error;

pub type CliResult<T> = Result<T, CliError>;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration: {0}")]
    Config(String),

    #[error("unknown preset `{0}` (available: fig1, fig3, fig4, fig5-6, fig7-8)")]
    UnknownPreset(String),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("missing input: {0}")]
    MissingInput(String),

    #[error(transparent)]
    Core(#[from] aggint::Error),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.display().to_string(),
            source,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::UnknownPreset(_) => "unknown_preset",
            CliError::Io { .. } => "io",
            CliError::MissingInput(_) => "missing_input",
            CliError::Core(_) => "computation",
        }
    }

    /// One-line JSON object for scripts consuming stderr.
    pub fn summary(&self, command: &str) -> String {
        #[derive(Serialize)]
        struct Summary<'a> {
            status: &'static str,
            command: &'a str,
            kind: &'static str,
            message: String,
        }
        serde_json::to_string(&Summary {
            status: "error",
            command,
            kind: self.kind(),
            message: self.to_string(),
        })
        .expect("summary serializes")
    }
}
