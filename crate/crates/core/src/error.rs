//! Crate-wide error type.

/// Errors produced by geometry construction, operator assembly, linear
/// algebra, sampling, and file I/O.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid argument `{name}`: {reason}")]
    InvalidArgument { name: &'static str, reason: String },

    #[error("dimension mismatch for {what}: expected {expected}, got {got}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("duplicate points: indices {i} and {j} coincide")]
    DuplicatePoints { i: usize, j: usize },

    #[error("point cloud has no boundary points")]
    EmptyBoundary,

    #[error("operator of kind `{kind}` does not support {operation}")]
    UnsupportedOperator {
        kind: &'static str,
        operation: &'static str,
    },

    #[error("linear system ill-conditioned: estimated condition {cond:.3e} exceeds {threshold:.3e}")]
    IllConditioned { cond: f64, threshold: f64 },

    #[error("exactly singular linear system (zero pivot at column {col})")]
    SingularSystem { col: usize },

    #[error("linear solve residual {residual:.3e} exceeds tolerance {tol:.3e}")]
    ResidualTooLarge { residual: f64, tol: f64 },

    #[error("eigensolver failed to converge for eigenvalue index {index}")]
    EigenNoConvergence { index: usize },

    #[error("design matrix rank deficient near column `{column}`")]
    RankDeficient { column: String },

    #[error("forward map produced a non-finite value: {detail}")]
    NonFiniteForward { detail: String },

    #[error("chain holds no samples")]
    EmptyChain,

    #[error("field evaluation failed: {0}")]
    FieldEvaluation(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    /// Shorthand for argument validation failures.
    pub fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidArgument {
            name,
            reason: reason.into(),
        }
    }
}
