use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {msg}")]
    Format { path: PathBuf, line: usize, msg: String },
    #[error(transparent)]
    Core(#[from] lpgraph::Error),
    #[error("{0}")]
    Usage(String),
    /// The twin harness found WL-indistinguishable LPs with different
    /// characteristics. That is a bug in refinement or solving, not bad input.
    #[error("twin check failed: {0}")]
    TwinMismatch(String),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    pub fn format(path: impl Into<PathBuf>, line: usize, msg: impl Into<String>) -> Self {
        CliError::Format { path: path.into(), line, msg: msg.into() }
    }

    /// Process exit code: 2 for a failed twin check, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::TwinMismatch(_) => 2,
            _ => 1,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
