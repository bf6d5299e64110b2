use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{0} evaluated inside the spectral band at omega = {1}")]
    InsideBand(&'static str, f64),

    #[error("solver failure: {0}")]
    Solver(String),

    #[error("propagator singular: I - V is not invertible (det = {0:e})")]
    SingularFluctuation(f64),

    #[error("pole search failed: {0}")]
    Poles(String),

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("unsupported spectral model for {0}")]
    Unsupported(&'static str),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
