use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("resource limit: {0}")]
    Resource(String),
    #[error("ill-conditioned problem: {0}")]
    Conditioning(String),
    #[error("{what} did not converge after {iterations} iterations (best residual {residual:.3e})")]
    NoConvergence {
        what: &'static str,
        iterations: usize,
        residual: f64,
    },
    #[error("internal consistency check failed: {0}")]
    Consistency(String),
}

impl Error {
    /// True for errors caused by the caller's parameters rather than numerics.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::InvalidInput(_) | Error::Domain(_) | Error::Config(_)
        )
    }
}
