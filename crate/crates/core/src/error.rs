use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("p = {0} is not an odd prime")]
    InvalidPrime(u64),
    #[error("invalid deformation parameter: {0}")]
    InvalidTheta(String),
    #[error("character depth p^{needed} exceeds the configured maximum p^{max}")]
    DepthExceeded { needed: u32, max: u32 },
    #[error("integral of mu0^-{n} diverges on k^{}", 2 * d)]
    Divergent { n: u32, d: u32 },
    #[error("resolution error: {0}")]
    Resolution(String),
    #[error("inadequate resolution: {what} needs (R,S) >= ({r},{s})")]
    Inadequate { what: String, r: i32, s: i32 },
    #[error("function is not constant on the cells of {0}")]
    NotConstant(String),
    #[error("mismatch: {0}")]
    Mismatch(String),
    #[error("mixed scalar backends")]
    MixedBackends,
    #[error("invalid algebra: {0}")]
    InvalidAlgebra(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("{0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;
