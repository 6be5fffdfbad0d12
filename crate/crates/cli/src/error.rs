use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("invalid {field}: {reason}")]
    Validation { field: String, reason: String },

    #[error("unknown command {0:?} (see --list-commands)")]
    UnknownCommand(String),

    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn validation(field: impl Into<String>, reason: impl ToString) -> Self {
        CliError::Validation {
            field: field.into(),
            reason: reason.to_string(),
        }
    }

    /// Config problems exit with 2; check failures are reported, not raised.
    pub fn exit_code(&self) -> i32 {
        2
    }
}
