use std::path::PathBuf;

use fracpass::Error as CoreError;
use thiserror::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_HYPOTHESIS: i32 = 3;
pub const EXIT_NON_CONVERGENCE: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("config {path}: {message}")]
    Config { path: PathBuf, message: String },
    #[error("{path}: {message}")]
    Csv { path: PathBuf, message: String },
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("hypotheses not satisfied: {}", .0.join(", "))]
    NotReady(Vec<String>),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } | CliError::Config { .. } | CliError::Csv { .. } => EXIT_CONFIG,
            CliError::NotReady(_) => EXIT_HYPOTHESIS,
            CliError::Core(e) => match e {
                CoreError::Hypothesis { .. } | CoreError::Inadmissible { .. } | CoreError::EmbeddingFails(_) => {
                    EXIT_HYPOTHESIS
                }
                CoreError::NonConvergence(_) | CoreError::GeometryViolation { .. } => EXIT_NON_CONVERGENCE,
                _ => EXIT_CONFIG,
            },
        }
    }

    /// Hypothesis tags behind this error, if any.
    pub fn hypothesis_tags(&self) -> Vec<String> {
        match self {
            CliError::NotReady(tags) => tags.clone(),
            CliError::Core(CoreError::EmbeddingFails(_)) => vec!["embedding".into()],
            CliError::Core(e) => e.hypothesis_tag().map(|t| vec![t.to_string()]).unwrap_or_default(),
            _ => Vec::new(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
