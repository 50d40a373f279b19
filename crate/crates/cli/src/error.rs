use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}:{line}:{col}: {message}")]
    Parse { path: String, line: usize, col: usize, message: String },

    #[error("invalid [{block}] block: {reason}")]
    Validation { block: String, reason: String },

    #[error("unknown command `{0}`")]
    UnknownCommand(String),

    #[error("{context}: {source}")]
    Core {
        context: String,
        #[source]
        source: braidlie::Error,
    },

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("{0}")]
    Usage(String),
}

impl CliError {
    pub fn core(context: impl Into<String>) -> impl FnOnce(braidlie::Error) -> CliError {
        let context = context.into();
        move |source| CliError::Core { context, source }
    }

    pub fn validation(block: &str, reason: impl ToString) -> CliError {
        CliError::Validation { block: block.into(), reason: reason.to_string() }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
