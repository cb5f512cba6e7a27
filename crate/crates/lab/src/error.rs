use std::path::PathBuf;

use ccn_dart::sim::AuditViolation;
use thiserror::Error;

/// Everything a subcommand can fail with, grouped by exit status.
#[derive(Debug, Error)]
pub enum LabError {
    #[error("{path}:{line}: {msg}")]
    Config { path: PathBuf, line: usize, msg: String },

    #[error("{path}: {msg}")]
    Input { path: PathBuf, msg: String },

    #[error("cell {cell}: {violation}")]
    Audit { cell: String, violation: Box<AuditViolation>, trace: Vec<String> },

    #[error("{0}")]
    Assertion(String),

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
}

impl LabError {
    /// 0 ok, 1 config or input error, 2 audit violation, 3 assertion failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::Config { .. } | LabError::Input { .. } | LabError::Io { .. } => 1,
            LabError::Audit { .. } => 2,
            LabError::Assertion(_) => 3,
        }
    }

    pub(crate) fn io(context: impl Into<String>) -> impl FnOnce(std::io::Error) -> LabError {
        let context = context.into();
        move |source| LabError::Io { context, source }
    }
}
