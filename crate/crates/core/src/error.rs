use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Input outside the region where exp/log/transport are defined
    /// (cut locus, step beyond the injectivity radius).
    #[error("domain error: {0}")]
    Domain(String),

    #[error("matrix is not positive definite (smallest eigenvalue {min_eig:e})")]
    NotPositiveDefinite { min_eig: f64 },

    #[error("component index {index} out of range for n = {n}")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("infeasible parameters: {0}")]
    ParameterInfeasible(String),

    #[error("oracle did not converge: residual {residual:e} after {steps} steps")]
    OracleNotConverged { residual: f64, steps: usize },

    #[error("numerical abort at epoch {epoch}, step {step}: {reason}")]
    NumericalAbort {
        epoch: usize,
        step: usize,
        reason: String,
    },

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
