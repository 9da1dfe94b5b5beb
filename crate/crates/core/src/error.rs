use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),

    #[error("sites {start}..={end} are not covered by the potential")]
    Coverage { start: i64, end: i64 },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("size {size} exceeds the limit {limit}")]
    TooLarge { size: usize, limit: usize },

    #[error("{count} eigenvalues lie within {radius:e} of the shift; none is isolated")]
    NotIsolated { count: usize, radius: f64 },

    #[error("no convergence after {iterations} iterations (last residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    /// True for errors caused by bad arguments rather than by a failed computation.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Input(_) | Error::Coverage { .. } | Error::Parse { .. } | Error::TooLarge { .. }
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
