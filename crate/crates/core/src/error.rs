use thiserror::Error;

/// Failure modes shared by every module of the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Invalid parameters or malformed configuration input.
    #[error("configuration error: {0}")]
    Config(String),
    /// An argument outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// A numerical procedure did not converge.
    #[error("numerical failure: {0}")]
    Numerical(String),
    /// A real starting point of the reverse flow ran into the driver.
    #[error("reverse flow collided with the driver at s = {time}")]
    BoundaryCollision { time: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
