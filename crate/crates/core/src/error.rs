use thiserror::Error;

/// Errors produced by geometric kernels, operators, checks and the harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("empty point set")]
    EmptyInput,
    #[error("non-finite coordinate in input point")]
    NonFinitePoint,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("matrix is singular (|det| = {det:e})")]
    SingularMatrix { det: f64 },
    #[error("invalid subspace: {0}")]
    BadSubspace(String),
    #[error("halfspace clip produced an empty set")]
    EmptyResult,
    #[error("unsupported ambient dimension {0}")]
    UnsupportedDimension(usize),
    #[error("mixed-volume interpolation is ill-conditioned (rcond = {rcond:e})")]
    IllConditionedInterpolation { rcond: f64 },
    #[error("bad quermassintegral index {index} for dimension {dim}")]
    BadIndex { index: usize, dim: usize },
    #[error("body is lower-dimensional (dim {dim} < {ambient})")]
    DegenerateBody { dim: usize, ambient: usize },
    #[error("associated body leaves the nonnegative quadrant at vertex ({0}, {1})")]
    NegativeCoefficientRegime(f64, f64),
    #[error("operator {op} is not supported in dimension {dim}")]
    UnsupportedForDimension { op: String, dim: usize },
    #[error("corpus exhausted after {0} attempts")]
    CorpusExhausted(usize),
    #[error("operator {op} cannot be checked for {property}: {reason}")]
    SpecNotApplicable {
        op: String,
        property: String,
        reason: String,
    },
    #[error("bad specification: {0}")]
    BadSpec(String),
    #[error("operator image is empty")]
    EmptyImage,
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
