use thiserror::Error;

/// Errors produced by the clustering library.
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed or out-of-range input.
    #[error("invalid input: {0}")]
    Input(String),

    /// A point or parameter had the wrong dimension.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    /// Mode finding hit a critical point whose Hessian is (numerically) singular.
    #[error("degenerate density: {0}")]
    Degenerate(String),

    /// A metric is not defined for the given input (e.g. fewer than two points).
    #[error("undefined metric: {0}")]
    UndefinedMetric(String),

    /// The requested option is not supported for this dimension.
    #[error("unsupported dimension {0} for this option")]
    UnsupportedDimension(usize),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Short machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Input(_) => "input",
            Error::Dimension { .. } => "dimension",
            Error::Degenerate(_) => "degenerate",
            Error::UndefinedMetric(_) => "undefined_metric",
            Error::UnsupportedDimension(_) => "unsupported_dimension",
            Error::Io(_) => "io",
            Error::Csv(_) => "csv",
            Error::Json(_) => "json",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn input_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Input(msg.into()))
}
