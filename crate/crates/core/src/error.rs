use thiserror::Error;

/// Errors raised by state validation, divergences, channels and the harness.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix has a non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("not Hermitian: max |M_ij - conj(M_ji)| = {deviation:e}")]
    NotHermitian { deviation: f64 },

    #[error("not positive semidefinite: min eigenvalue {min_eigenvalue:e}")]
    NotPositive { min_eigenvalue: f64 },

    #[error("trace is not one: Tr = {trace}")]
    TraceNotOne { trace: f64 },

    #[error("vector is not normalized: norm = {norm}")]
    NotNormalized { norm: f64 },

    #[error("eigen-solver did not converge")]
    ConvergenceFailure,

    #[error("invalid rank {rank} for dimension {dim}")]
    InvalidRank { rank: usize, dim: usize },

    #[error("parameter {name} = {value} outside {range}")]
    ParamOutOfRange {
        name: &'static str,
        value: f64,
        range: &'static str,
    },

    #[error("unknown generator function `{0}`")]
    UnknownGenerator(String),

    #[error("generator {generator} has an infinite limit required for {context}")]
    UnsupportedLimit {
        generator: String,
        context: &'static str,
    },

    #[error("state is singular: eigenvalue {min_eigenvalue:e} below floor")]
    SingularState { min_eigenvalue: f64 },

    #[error("Kraus operators are not complete: ||sum K*K - I||_F = {deviation:e}")]
    NotTracePreserving { deviation: f64 },

    #[error("channel is not unital: ||sum K K* - I||_F = {deviation:e}")]
    NotUnital { deviation: f64 },

    #[error("channel is not GIO: {0}")]
    NotGio(String),

    #[error("bad mixture weights: {0}")]
    BadWeights(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
