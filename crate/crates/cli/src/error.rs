use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid parameter: {0}")]
    Invalid(String),

    #[error(transparent)]
    Model(#[from] cavity_rotation::Error),

    #[error("cannot read {}: {source}", path.display())]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("cannot write output: {0}")]
    Write(#[from] std::io::Error),

    #[error("{count} oracle point(s) differ from the analytic spectrum by more than {limit} standard errors")]
    OracleMismatch { count: usize, limit: f64 },
}

impl CliError {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        CliError::Invalid(msg.into())
    }

    /// 2 for bad input, 3 for numerical failure, 4 for an oracle mismatch,
    /// 1 for I/O errors.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Invalid(_) | CliError::Read { .. } => 2,
            CliError::Model(e) if e.is_invalid_input() => 2,
            CliError::Model(_) => 3,
            CliError::OracleMismatch { .. } => 4,
            CliError::Write(_) => 1,
        }
    }
}
