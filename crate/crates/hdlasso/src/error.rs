use thiserror::Error;

/// Crate-wide error type. Variants carry enough context to act on the
/// failure without re-running the computation.
#[derive(Debug, Error)]
pub enum Error {
    /// Dimension mismatches, empty inputs, out-of-range parameters.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A NaN or infinity reached a numeric kernel.
    #[error("non-finite value in {0}")]
    NonFinite(String),

    /// A simulated process failed its stationarity check.
    #[error("unstable process: {0}")]
    UnstableProcess(String),

    /// A requested moment exceeds what the innovation law possesses.
    #[error("moment condition violated: {0}")]
    MomentCondition(String),

    /// Dependence coefficients do not have a summable tail.
    #[error("non-summable dependence tail: {0}")]
    NonSummableDependence(String),

    /// Parameters fall outside the regimes the rate theory covers.
    #[error("unsupported regime: {0}")]
    UnsupportedRegime(String),

    /// A matrix that must be invertible is singular to working precision.
    #[error("singular matrix: {0}")]
    Singular(String),

    /// An iterative fit exhausted its budget without certifying optimality.
    #[error("no converged fit: {0}")]
    NoConvergedFit(String),

    /// Malformed external data; message names the file and line.
    #[error("ingest error: {0}")]
    Ingest(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
