use thiserror::Error;

/// Crate-wide error type. Numerical routines fail loudly rather than
/// returning silently wrong values.
#[derive(Debug, Error)]
pub enum Error {
    /// Input outside the mathematical domain of a routine.
    #[error("domain error: {0}")]
    Domain(String),

    /// An iteration failed to converge within its budget.
    #[error("convergence failure: {0}")]
    Convergence(String),

    /// Mesh generation or validation failed.
    #[error("mesh error: {0}")]
    Mesh(String),

    /// A documented precondition was violated by the caller.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// A quantity is outside the range where the discretization resolves it.
    #[error("resolution limit: {0}")]
    Resolution(String),

    /// Linear or nonlinear solver failure.
    #[error("solver error: {0}")]
    Solver(String),

    /// Malformed configuration or data file.
    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
    pub fn convergence(msg: impl Into<String>) -> Self {
        Error::Convergence(msg.into())
    }
    pub fn mesh(msg: impl Into<String>) -> Self {
        Error::Mesh(msg.into())
    }
    pub fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }
    pub fn resolution(msg: impl Into<String>) -> Self {
        Error::Resolution(msg.into())
    }
    pub fn solver(msg: impl Into<String>) -> Self {
        Error::Solver(msg.into())
    }
    pub fn format(msg: impl Into<String>) -> Self {
        Error::Format(msg.into())
    }
}
