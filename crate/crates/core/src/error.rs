/// Errors produced by the simulation pipelines.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A physical or numerical parameter is out of its valid range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Matrix dimensions do not match between operands.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// A LAPACK routine reported failure (nonzero info).
    #[error("linear algebra failure in {routine} (info = {info})")]
    Lapack { routine: &'static str, info: i32 },

    /// An iterative solve did not reach its tolerance.
    #[error("no convergence: {0}")]
    NonConvergence(String),

    /// Wave-vector closure cannot be satisfied for the requested wavelengths.
    #[error("infeasible beam geometry: {0}")]
    Geometry(String),

    /// A least-squares or nonlinear fit failed.
    #[error("fit failed: {0}")]
    Fit(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
