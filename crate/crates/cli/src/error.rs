use thiserror::Error;

/// Process exit codes.
pub const EXIT_VALIDATION: u8 = 2;
pub const EXIT_NUMERICAL: u8 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("sample file header: {0}")]
    SampleHeader(String),

    /// `row` counts data rows from 0, so it equals the node index.
    #[error("sample file row {row}: {message}")]
    Samples { row: usize, message: String },

    #[error("{0}")]
    Library(#[from] w2interp::Error),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("{0}")]
    Failed(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        use w2interp::Error as E;
        match self {
            CliError::Usage(_) | CliError::SampleHeader(_) | CliError::Samples { .. } | CliError::Io(_) => EXIT_VALIDATION,
            CliError::Library(
                E::InvalidOrder
                | E::InvalidGrid { .. }
                | E::InvalidStep(_)
                | E::PointOutOfRange(_)
                | E::GridMismatch { .. }
                | E::WrongOrder { .. }
                | E::NonFiniteSample(_),
            ) => EXIT_VALIDATION,
            CliError::Library(_) | CliError::Failed(_) => EXIT_NUMERICAL,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
