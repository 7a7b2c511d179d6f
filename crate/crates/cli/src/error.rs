use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("parse error at position {position}: {message}")]
    Parse { position: usize, message: String },
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Domain(#[from] ptbundle::Error),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Parse { .. } => "ParseError",
            CliError::Usage(_) => "UsageError",
            CliError::Domain(e) => e.kind(),
            CliError::Io(_) => "IoError",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse { .. } | CliError::Usage(_) => 1,
            CliError::Domain(_) => 2,
            CliError::Io(_) => 3,
        }
    }

    pub(crate) fn shifted(self, by: usize) -> CliError {
        match self {
            CliError::Parse { position, message } => CliError::Parse {
                position: position + by,
                message,
            },
            other => other,
        }
    }
}
