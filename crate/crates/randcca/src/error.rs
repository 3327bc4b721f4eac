//! Error type shared by the dataset, kernel and solver layers.

use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("failed to read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    #[error(
        "parallel files differ in line count: view A has {lines_a} lines, view B has {lines_b}"
    )]
    LineCountMismatch { lines_a: usize, lines_b: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("rank zero input")]
    RankZeroInput,

    #[error("not positive definite; increase regularization")]
    NotPositiveDefinite,

    #[error("singular triangular factor")]
    SingularTriangularFactor,

    #[error("oversampling too small for target rank")]
    OversamplingTooSmall,

    #[error("Cholesky failed on regularized Gram matrix: increase regularization ν")]
    IncreaseRegularization,

    #[error("randomized basis rank collapse: achieved rank {achieved}, need at least {needed}")]
    RankCollapse { achieved: usize, needed: usize },

    #[error("rank-deficient block; reduce k or raise λ")]
    RankDeficientBlock,

    #[error("numerical failure: {0}")]
    Numeric(String),
}
