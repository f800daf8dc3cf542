use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("integer overflow in lattice arithmetic: {0}")]
    Overflow(String),

    #[error("candidate radius insufficient: {0}")]
    RadiusInsufficient(String),

    #[error("truncation tail bound violated: {0}")]
    TailBound(String),

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    #[error("solver hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("solver failed: {0}")]
    Solver(String),

    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
