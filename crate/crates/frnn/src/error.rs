use thiserror::Error;

use crate::nonlinear::NewtonTrace;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unsupported derivative order {order} (maximum is {max})")]
    UnsupportedOrder { order: usize, max: usize },

    #[error("resource limit: {0}")]
    ResourceLimit(String),

    #[error("sampling failure: {0}")]
    SamplingFailure(String),

    #[error("reference solution has zero norm")]
    DegenerateReference,

    #[error("newton iteration diverged at iteration {}", trace.len())]
    Divergence { trace: NewtonTrace },

    #[error("least-squares solve failed: {0}")]
    Solver(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
