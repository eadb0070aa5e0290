//! Error type shared by the pipeline stages, carrying the process exit
//! code each failure class maps to.

use std::path::PathBuf;

/// Process exit codes: 0 success, 2 usage or missing input, 3 bad data,
/// 4 internal.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitCode {
    Success = 0,
    Usage = 2,
    Data = 3,
    Internal = 4,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage error: {0}")]
    Usage(String),
    /// An input artifact is absent. Distinct from `Data`: the file never
    /// made it to parsing, so the caller invoked stages out of order or
    /// pointed at the wrong place.
    #[error("missing input: {what} ({path})")]
    Missing { path: PathBuf, what: String },
    #[error("{path}: {message}")]
    Data { path: PathBuf, message: String },
    #[error("invalid data: {0}")]
    Invalid(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("internal error: {0}")]
    Internal(String),
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> CliError {
        CliError::Usage(message.into())
    }

    pub fn missing(path: impl Into<PathBuf>, what: impl Into<String>) -> CliError {
        CliError::Missing { path: path.into(), what: what.into() }
    }

    pub fn data(path: impl Into<PathBuf>, message: impl Into<String>) -> CliError {
        CliError::Data { path: path.into(), message: message.into() }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> CliError {
        CliError::Io { path: path.into(), source }
    }

    pub fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Usage(_) | CliError::Missing { .. } => ExitCode::Usage,
            CliError::Data { .. } | CliError::Invalid(_) | CliError::Io { .. } => ExitCode::Data,
            CliError::Internal(_) => ExitCode::Internal,
        }
    }
}

/// Core errors surfacing through a stage are data errors: they are
/// triggered by what was read from disk, not by flag parsing.
impl From<washmap_core::Error> for CliError {
    fn from(e: washmap_core::Error) -> CliError {
        CliError::Invalid(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_match_failure_classes() {
        assert_eq!(CliError::usage("x").exit_code(), ExitCode::Usage);
        assert_eq!(CliError::missing("m.json", "model").exit_code(), ExitCode::Usage);
        assert_eq!(CliError::data("f.asc", "bad").exit_code(), ExitCode::Data);
        assert_eq!(CliError::Invalid("bad".into()).exit_code(), ExitCode::Data);
        assert_eq!(
            CliError::io("f.asc", std::io::Error::other("gone")).exit_code(),
            ExitCode::Data
        );
        assert_eq!(CliError::Internal("x".into()).exit_code(), ExitCode::Internal);
        assert_eq!(ExitCode::Success as i32, 0);
        assert_eq!(ExitCode::Usage as i32, 2);
        assert_eq!(ExitCode::Data as i32, 3);
        assert_eq!(ExitCode::Internal as i32, 4);
    }

    #[test]
    fn core_errors_become_data_errors() {
        let core = washmap_core::Error::Validation("cell_size must be positive".into());
        let cli: CliError = core.into();
        assert_eq!(cli.exit_code(), ExitCode::Data);
        assert!(cli.to_string().contains("cell_size"));
    }
}
