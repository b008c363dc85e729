use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("derivative order {order} unsupported (max {max})")]
    UnsupportedOrder { order: usize, max: usize },
    #[error("invalid curve: {0}")]
    InvalidCurve(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("curve is infinitely flat (omega = +inf); no finite exponent line")]
    FlatCurve,
    #[error("direction not admissible: {0}")]
    NotAdmissible(String),
    #[error("quadrature needs {required} nodes, cap is {cap}")]
    InsufficientNodes { required: usize, cap: usize },
    #[error("resolution guard: {0}")]
    Resolution(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("internal consistency error: {0}")]
    Internal(String),
}

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse(_) => 2,
            Error::FlatCurve | Error::Unsupported(_) | Error::UnsupportedOrder { .. } => 3,
            Error::Resolution(_) => 4,
            Error::NotAdmissible(_) => 5,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
