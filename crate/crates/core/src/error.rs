//! Error type shared by all solver and I/O paths.

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A caller-supplied argument violates a precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A matrix handed to the Cholesky factorization is not positive
    /// definite; `pivot` is the zero-based index of the failing pivot.
    #[error("matrix is not positive definite: pivot {pivot} = {value:e}")]
    NotPositiveDefinite { pivot: usize, value: f64 },

    /// An iterative solver produced a non-finite iterate.
    #[error("solver diverged: non-finite iterate at iteration {iter}")]
    Diverged { iter: usize },

    /// A constrained problem has an empty feasible region.
    #[error("infeasible: {0}")]
    Infeasible(String),

    /// A condition that should be impossible by construction.
    #[error("internal error: {0}")]
    Internal(String),

    /// Malformed CSV or JSON input.
    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
