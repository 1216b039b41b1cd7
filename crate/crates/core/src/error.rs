use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not unimodular (det = {0})")]
    NotUnimodular(String),
    #[error("matrix must be square and non-empty, got {rows} rows with row lengths {row_lens:?}")]
    BadShape { rows: usize, row_lens: Vec<usize> },
    #[error("hyperbolicity undecided: root near {root} has certified radius {radius:e}")]
    UndecidedHyperbolicity { root: String, radius: f64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("coefficient map is not Hermitian at k = {0:?}")]
    NotHermitian(Vec<i64>),
    #[error("observable is not centered: c_0 = {0}")]
    NotCentered(String),
    #[error("family has no tail evaluator for exponent {0}")]
    UnsupportedTail(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("automorphism is not ergodic (cyclotomic factor Phi_{0})")]
    NotErgodic(u64),
    #[error("memory budget exceeded: need {need_mb} MB, budget {budget_mb} MB")]
    BudgetExceeded { need_mb: u64, budget_mb: u64 },
    #[error("invalid Markov model: {0}")]
    InvalidModel(String),
    #[error("projection series diverges numerically: {0}")]
    DivergentSeries(String),
    #[error("bad ensemble file: {0}")]
    BadEnsemble(String),
    #[error("missing {0}")]
    MissingArtifact(String),
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
