use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("non-conforming triangulation: {0}")]
    NonConforming(String),
    #[error("degenerate triangle {element}: signed area {area}")]
    DegenerateElement { element: usize, area: f64 },
    #[error("duplicate triangle {first} and {second}")]
    DuplicateTriangle { first: usize, second: usize },
    #[error("invalid index: {0}")]
    InvalidIndex(String),
    #[error("unknown example id {0} (expected 1, 2 or 3)")]
    UnknownExample(u32),
    #[error("invalid barycentric point {0:?}")]
    InvalidBarycentric([f64; 3]),
    #[error("edge {0} is a boundary edge")]
    BoundaryEdge(usize),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("singular or indefinite reduced system: {0}")]
    SingularSystem(String),
    #[error("linear solver failed after {iterations} iterations (relative residual {residual:e})")]
    LinearSolver { iterations: usize, residual: f64 },
    #[error("primal-dual active set did not converge in {0} iterations")]
    NotConverged(usize),
    #[error("need at least {needed} records, got {got}")]
    InsufficientData { needed: usize, got: usize },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
