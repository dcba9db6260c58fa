use thiserror::Error;

/// Errors raised by the library. Numeric payloads are stored as `f64`
/// regardless of the scalar type used for the computation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("vectors are attached to different mass vectors")]
    MassMismatch,

    #[error("invalid body system: {0}")]
    InvalidSystem(String),

    #[error("vector is not in D_N: |sum m_i x_i| = {residual:e} exceeds {tolerance:e}")]
    NotInDn { residual: f64, tolerance: f64 },

    #[error("collision between bodies {i} and {j}")]
    Collision { i: usize, j: usize },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("matrix is not a proper rotation (deviation {deviation:e})")]
    NotRotation { deviation: f64 },

    #[error("degenerate angular-momentum Gram matrix (condition number {condition:e})")]
    DegenerateGram { condition: f64 },

    #[error("multiplier is zero")]
    ZeroMultiplier,

    #[error("kernel fails homogeneity check for declared degree {degree}: worst relative error {worst:e}")]
    NotHomogeneous { degree: f64, worst: f64 },

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("cluster detection inconclusive: {0}")]
    InconclusiveClusters(String),

    #[error("pair ({i}, {j}) has no relative equilibrium (gamma = {gamma})")]
    NoRelativeEquilibrium { i: usize, j: usize, gamma: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("precondition not met: {0}")]
    Precondition(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
