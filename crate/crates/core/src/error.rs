use thiserror::Error;

/// Errors surfaced by detectors, tree construction, and the simulation harness.
#[derive(Debug, Error)]
pub enum Error {
    /// An input violated a documented precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The Gram matrix of the system is (numerically) rank deficient.
    #[error("singular system: {0}")]
    SingularSystem(String),

    /// A covariance matrix lost positive definiteness.
    #[error("degenerate covariance: {0}")]
    DegenerateCovariance(String),

    /// An internal numeric invariant was violated (underflow, NaN).
    #[error("numeric failure: {0}")]
    NumericFailure(String),

    /// Exhaustive ML refuses to enumerate more candidates than its budget.
    #[error("ML enumeration of {required} candidates exceeds the budget of {budget}")]
    MlBudgetExceeded { required: f64, budget: u64 },

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
