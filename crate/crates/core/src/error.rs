use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("matrix is {distance:.3e} from SO(3) in Frobenius norm (limit {limit:.1e})")]
    NotNearRotation { distance: f64, limit: f64 },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("gamma is not a unit vector (|gamma| = {norm})")]
    NonUnitGamma { norm: f64 },

    #[error("non-finite state encountered at step {step}")]
    NonFinite { step: usize },

    #[error("singular constraint system (det = {det:e})")]
    SingularConstraint { det: f64 },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
