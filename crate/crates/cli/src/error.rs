use qfim_core::QfimError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot parse {path}: {message}")]
    Parse { path: String, message: String },

    #[error(transparent)]
    Core(#[from] QfimError),

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("{0}")]
    Usage(String),
}

impl CliError {
    /// 2 for rank deficiency, 3 for unparsable input, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(QfimError::RankDeficient { .. }) => 2,
            CliError::Parse { .. } => 3,
            _ => 1,
        }
    }

    pub(crate) fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        CliError::Io {
            context: context.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
