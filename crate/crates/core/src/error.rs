use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("modulus mismatch: {0} vs {1}")]
    ModulusMismatch(u64, u64),
    #[error("division by zero in F_{0}")]
    DivisionByZero(u64),
    #[error("{0} is not a prime")]
    NotPrime(u64),
    #[error("value {value} out of range [0, {bound})")]
    OutOfRange { value: u64, bound: u64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("budget exceeded: {0}")]
    Budget(String),
    #[error("wrong cardinality: expected {expected}, got {got}")]
    Cardinality { expected: usize, got: usize },
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
