use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags, malformed input files or unknown ids; exit code 2.
    #[error("{0}")]
    Usage(String),
    /// A numerical routine failed; exit code 1.
    #[error("{0}")]
    Numeric(igauss::Error),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

impl From<igauss::Error> for CliError {
    fn from(e: igauss::Error) -> Self {
        match e {
            igauss::Error::UnknownEstimate(_)
            | igauss::Error::DimensionMismatch { .. }
            | igauss::Error::InvalidArgument(_)
            | igauss::Error::OrderOutOfRange(_) => CliError::Usage(e.to_string()),
            other => CliError::Numeric(other),
        }
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(std::io::Error::other(e))
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Numeric(_) | CliError::Io(_) => 1,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
