use std::path::PathBuf;

use thiserror::Error;

/// Exit status for an invalid configuration.
pub const EXIT_CONFIG: i32 = 2;
/// Exit status for a numerical or validation failure.
pub const EXIT_NUMERICS: i32 = 3;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Invalid { line: usize, message: String },
    #[error("cannot read {}: {source}", path.display())]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl ConfigError {
    pub fn at(line: usize, message: impl Into<String>) -> Self {
        Self::Invalid {
            line,
            message: message.into(),
        }
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(#[from] ConfigError),
    #[error("{stage}: {source}")]
    Numerics {
        stage: &'static str,
        #[source]
        source: antonov_core::Error,
    },
    #[error("validate: {0}")]
    Validation(String),
    #[error("cannot write {}: {source}", path.display())]
    Write {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("thread pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
    #[error("serialize: {0}")]
    Serialize(#[from] serde_json::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) => EXIT_CONFIG,
            Self::Numerics { .. } | Self::Validation(_) => EXIT_NUMERICS,
            _ => 1,
        }
    }
}

/// Attaches the pipeline stage to a core error.
pub trait Stage<T> {
    fn stage(self, stage: &'static str) -> Result<T, CliError>;
}

impl<T> Stage<T> for antonov_core::Result<T> {
    fn stage(self, stage: &'static str) -> Result<T, CliError> {
        self.map_err(|source| CliError::Numerics { stage, source })
    }
}
