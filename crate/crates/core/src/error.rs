use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("invalid UTF-8 at byte offset {offset}{}", line.map(|l| format!(" (line {l})")).unwrap_or_default())]
    Decode { line: Option<usize>, offset: usize },

    #[error("line {line}: a sentence may not contain a newline")]
    EmbeddedNewline { line: usize },

    #[error("misaligned inputs: {left} lines vs {right} lines")]
    Alignment { left: usize, right: usize },

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("format error: {0}")]
    Format(String),

    #[error("translator contract violated: expected {expected} output lines, got {actual}")]
    ContractViolation { expected: usize, actual: usize },

    #[error("external command `{command}` failed ({status}): {stderr}")]
    CommandFailed {
        command: String,
        status: String,
        stderr: String,
    },

    #[error("external command `{command}` timed out after {seconds}s")]
    Timeout { command: String, seconds: u64 },

    #[error("{phase} phase failed: {source}")]
    Phase {
        phase: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for failures of a spawned external process (nonzero exit, timeout, spawn failure).
    pub fn is_external(&self) -> bool {
        match self {
            Error::CommandFailed { .. } | Error::Timeout { .. } => true,
            Error::Phase { source, .. } => source.is_external(),
            _ => false,
        }
    }
}
