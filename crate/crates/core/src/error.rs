use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("vectors must have at least one coordinate")]
    EmptyVector,

    #[error("non-finite value encountered ({context})")]
    NonFinite { context: &'static str },

    #[error("zero vector is not allowed here ({context})")]
    ZeroVector { context: &'static str },

    #[error("invalid norm specification `{spec}`: {reason}")]
    InvalidNorm { spec: String, reason: String },

    #[error("cannot parse `{token}`: {reason}")]
    Parse { token: String, reason: String },

    #[error("{name} = {value} violates {constraint}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        constraint: &'static str,
    },

    #[error("epsilon {0} is outside [0, 1)")]
    EpsilonOutOfRange(f64),

    #[error("precondition violated: {0}")]
    Precondition(&'static str),

    #[error("the linear map is zero")]
    ZeroMap,

    #[error("map is not a similarity candidate: minimum modulus is zero")]
    NotSimilarityCandidate,

    #[error("root finding failed: {0}")]
    RootFinding(&'static str),

    #[error("theta identity residual {residual:e} exceeds {limit:e}")]
    IdentityMismatch { residual: f64, limit: f64 },
}
