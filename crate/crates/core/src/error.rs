use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("size limit exceeded: {0}")]
    Size(String),

    #[error("observer coincides with lattice point ({q}, {a})")]
    DegeneratePoint { q: i64, a: i64 },

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("{x} has no inverse modulo {q}")]
    NoInverse { x: i64, q: u64 },

    #[error("quadrature did not reach tolerance: estimate {estimate}, error {error}")]
    Quadrature { estimate: f64, error: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("empty input: {0}")]
    Empty(String),

    #[error("check failed: {0}")]
    Check(String),

    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::Invalid(msg.into())
}
