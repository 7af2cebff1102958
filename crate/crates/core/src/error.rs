use thiserror::Error;

pub type Result<T> = std::result::Result<T, RdError>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RdError {
    #[error("{name} = {value} is outside [0, 1]")]
    OutOfRange { name: &'static str, value: f64 },

    #[error("side information is deterministic for (a, b) = ({a}, {b}); p(Y = y) vanishes")]
    DegenerateChannel { a: f64, b: f64 },

    #[error("channel (a, b) = ({a}, {b}) is not canonical (need a <= b and a + b <= 1); canonicalize it first")]
    NonCanonical { a: f64, b: f64 },

    #[error("distortion {d} is outside [0, {d_max}]")]
    DistortionOutOfRange { d: f64, d_max: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("numerical failure: {0}")]
    Numerical(String),
}
