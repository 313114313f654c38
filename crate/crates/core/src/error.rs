use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid event at t={time}: {reason}")]
    InvalidEvent { time: f64, reason: String },
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParam { name: &'static str, reason: String },
    #[error("state ({0}, {1}) is not strictly inside the positive orthant")]
    NotInterior(f64, f64),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("non-stationary specification: {0}")]
    Unstable(String),
    #[error("quadrature did not converge: estimate {value:e}, error bound {bound:e}")]
    Quadrature { value: f64, bound: f64 },
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParam {
        name,
        reason: reason.into(),
    }
}

pub(crate) fn ensure(cond: bool, name: &'static str, reason: &str) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(param(name, reason))
    }
}
