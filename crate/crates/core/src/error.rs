use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown family `{0}`")]
    UnknownFamily(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("argument outside domain: {0}")]
    Domain(String),

    #[error(
        "quadrature did not converge on [{lo}, {hi}]: error estimate {abs_err:e} exceeds \
         tolerance {tolerance:e} after {subdivisions} subdivisions"
    )]
    NonConvergence {
        lo: f64,
        hi: f64,
        abs_err: f64,
        tolerance: f64,
        subdivisions: usize,
    },

    #[error("{estimator} refused: {reason}")]
    Refused { estimator: String, reason: String },

    #[error("empty sample")]
    EmptySample,

    /// A checked invariant does not hold (tampered artifact, failed check).
    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn refused(estimator: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Refused {
            estimator: estimator.into(),
            reason: reason.into(),
        }
    }

    /// True for numerical failures (as opposed to bad input or I/O).
    pub fn is_numeric(&self) -> bool {
        matches!(self, Error::NonConvergence { .. })
    }
}
