use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid sparsity budget: tau = {tau} exceeds dimension {dim}")]
    InvalidBudget { tau: usize, dim: usize },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("matrix must have at least one row and one column, got {rows}x{cols}")]
    EmptyMatrix { rows: usize, cols: usize },

    #[error("non-finite entry at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },

    #[error("singular input: {0}")]
    Singular(String),

    #[error("no ground-truth matrix within condition bound {bound} after {attempts} attempts")]
    ConditionInfeasible { bound: f64, attempts: usize },

    #[error("mapping direction {0} is not available for a semi-coupled model")]
    UnsupportedDirection(&'static str),

    #[error("column {column} has zero norm; cosine distance is undefined")]
    ZeroNorm { column: usize },

    #[error("labels: {0}")]
    Labels(String),

    #[error("no match results to evaluate")]
    EmptyResults,

    #[error("invalid rank {rank}: {reason}")]
    InvalidRank { rank: usize, reason: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{0}: empty input")]
    EmptyInput(PathBuf),

    #[error("{path}: cannot parse value {token:?} at row {row}, column {col}")]
    Parse {
        path: PathBuf,
        row: usize,
        col: usize,
        token: String,
    },

    #[error("{path}: non-finite value at row {row}, column {col}")]
    NonFiniteValue { path: PathBuf, row: usize, col: usize },

    #[error("{path}: row {row} has {found} fields, expected {expected}")]
    Ragged {
        path: PathBuf,
        row: usize,
        expected: usize,
        found: usize,
    },

    #[error("{path}: malformed header: {reason}")]
    Header { path: PathBuf, reason: String },

    #[error("{path}: dimensions {rows}x{cols} overflow the addressable size")]
    DimensionOverflow { path: PathBuf, rows: u64, cols: u64 },

    #[error("{path}: truncated ({reason})")]
    Truncated { path: PathBuf, reason: String },

    #[error("config: {0}")]
    Config(String),

    #[error("manifest {path}: {reason}")]
    Manifest { path: PathBuf, reason: String },
}

impl Error {
    /// True for failures of the numerics (as opposed to bad input data).
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Singular(_) | Error::ConditionInfeasible { .. })
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
