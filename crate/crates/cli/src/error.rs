use std::path::{Path, PathBuf};

use thiserror::Error;

use maskshift::{changepoint::ChangepointError, corpus::CorpusError};
use maskshift::{demographics::DemographicsError, sentiment::SentimentError, topics::TopicsError};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("missing {artifact}; run `maskshift {command}` first")]
    Dependency {
        artifact: PathBuf,
        command: &'static str,
    },
    #[error("data error: {0}")]
    Data(String),
    #[error("internal error: {0}")]
    Internal(String),
}

impl CliError {
    /// 1 usage/config, 2 data, 3 internal.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Dependency { .. } => 1,
            CliError::Data(_) => 2,
            CliError::Internal(_) => 3,
        }
    }

    pub fn write(path: &Path, e: impl std::fmt::Display) -> Self {
        CliError::Internal(format!("writing {}: {e}", path.display()))
    }

    pub fn read(path: &Path, e: impl std::fmt::Display) -> Self {
        CliError::Data(format!("reading {}: {e}", path.display()))
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

impl From<CorpusError> for CliError {
    fn from(e: CorpusError) -> Self {
        match e {
            CorpusError::Dictionary(_) => CliError::Config(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

impl From<SentimentError> for CliError {
    fn from(e: SentimentError) -> Self {
        match e {
            SentimentError::Rule { .. } => CliError::Config(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

impl From<DemographicsError> for CliError {
    fn from(e: DemographicsError) -> Self {
        match e {
            DemographicsError::Config(_) => CliError::Config(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

impl From<TopicsError> for CliError {
    fn from(e: TopicsError) -> Self {
        match e {
            TopicsError::Config(_) => CliError::Config(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

impl From<ChangepointError> for CliError {
    fn from(e: ChangepointError) -> Self {
        CliError::Data(e.to_string())
    }
}
