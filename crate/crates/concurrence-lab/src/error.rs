use thiserror::Error;

/// Crate-wide error type. Variants are shared across modules because most
/// pipelines (separability in particular) compose operations from several of
/// them.
#[derive(Debug, Error)]
pub enum Error {
    #[error("coefficient shape {got_rows}x{got_cols} does not match dims {want_rows}x{want_cols}")]
    ShapeMismatch {
        want_rows: usize,
        want_cols: usize,
        got_rows: usize,
        got_cols: usize,
    },

    #[error("non-finite entry at index {index}")]
    NonFiniteEntry { index: usize },

    #[error("local dimension {dim} is below the minimum of {min}")]
    DimensionTooSmall { dim: usize, min: usize },

    #[error("local dimension {dim} exceeds the configured cap {cap}")]
    DimensionTooLarge { dim: usize, cap: usize },

    #[error("matrix is not Hermitian: max |A - A^H| entry = {deviation:.3e} (tolerance {tolerance:.1e})")]
    NotHermitian { deviation: f64, tolerance: f64 },

    #[error("trace deviates from 1 by {deviation:.3e} (tolerance {tolerance:.1e})")]
    TraceError { deviation: f64, tolerance: f64 },

    #[error("matrix is not positive semidefinite: min eigenvalue {min_eigenvalue:.3e}")]
    NotPositiveSemidefinite { min_eigenvalue: f64 },

    #[error("state has zero norm")]
    ZeroState,

    #[error("state is not normalized (Frobenius norm deviates by {deviation:.3e})")]
    NotNormalized { deviation: f64 },

    #[error("cannot shrink a decomposition from {current} to {requested} members")]
    ShrinkNotAllowed { current: usize, requested: usize },

    #[error("size mismatch: expected {expected}, got {got}")]
    SizeMismatch { expected: usize, got: usize },

    #[error("matrix is not unitary: max |U^H U - I| entry = {deviation:.3e}")]
    NotUnitary { deviation: f64 },

    #[error("bad parameter for state family `{family}`: {reason}")]
    BadParameter { family: String, reason: String },

    #[error("minor order {k} out of range 2..={max}")]
    BadOrder { k: usize, max: usize },

    #[error("objective returned a non-finite value")]
    NonFiniteObjective,

    #[error("operation requires dims (2,2), got ({d_a},{d_b})")]
    WrongDims { d_a: usize, d_b: usize },

    #[error("numerical rank {rank} exceeds 2")]
    RankTooHigh { rank: usize },

    #[error("numerical factorization failed: {0}")]
    ComputationFailed(String),

    #[error("schema error in {path}: {detail}")]
    SchemaError { path: String, detail: String },
}

pub type Result<T> = std::result::Result<T, Error>;
