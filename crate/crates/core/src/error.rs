use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {field}: {reason}")]
    InvalidConfig { field: &'static str, reason: String },

    #[error("dimension mismatch in {what}: expected {expected}, got {got}")]
    DimensionMismatch {
        what: &'static str,
        expected: String,
        got: String,
    },

    #[error("{what} index {index} out of range (len {len})")]
    IndexOutOfRange {
        what: &'static str,
        index: usize,
        len: usize,
    },

    #[error("state space too large: {alphabet}^{memory} exceeds limit {limit}")]
    StateSpaceTooLarge {
        alphabet: usize,
        memory: usize,
        limit: u64,
    },

    #[error("SDP solver did not converge after {iterations} iterations (primal {primal:.3e}, dual {dual:.3e})")]
    NotConverged {
        iterations: usize,
        primal: f64,
        dual: f64,
    },

    #[error("matrix is not Hermitian (max asymmetry {0:.3e})")]
    NotHermitian(f64),

    #[error("factorization failed: {0}")]
    Factorization(String),

    #[error("matrix is not full row rank")]
    RankDeficient,

    #[error("over-determined system: {rows} rows > {cols} columns")]
    OverDetermined { rows: usize, cols: usize },

    #[error("negative MUI power {0}")]
    NegativeMuiPower(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("scenario: {0}")]
    Scenario(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True for errors caused by user-supplied configuration.
    pub fn is_config(&self) -> bool {
        matches!(self, Error::InvalidConfig { .. } | Error::Scenario(_))
    }
}

pub(crate) fn mismatch(what: &'static str, expected: impl ToString, got: impl ToString) -> Error {
    Error::DimensionMismatch {
        what,
        expected: expected.to_string(),
        got: got.to_string(),
    }
}
