use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// Input outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    #[error("parse error: {0}")]
    Parse(String),
    /// Input is valid but the operation is not implemented for it (e.g. non-periodic expansions).
    #[error("unsupported: {0}")]
    Unsupported(String),
    /// A search or certificate could not be completed within its budget.
    #[error("inconclusive: {0}")]
    Inconclusive(String),
    #[error("resource limit: {0}")]
    ResourceLimit(String),
    /// Two independent computations disagreed.
    #[error("internal consistency check failed: {0}")]
    Internal(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
