use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("spectrum has no nonzero eigenvalue")]
    DegenerateSpectrum,

    #[error("solver failed after {iterations} iterations (residual {residual:.3e}): {reason}")]
    Solver {
        reason: String,
        iterations: usize,
        residual: f64,
    },

    #[error("precomputed kernels have no kernel function; load the matrix instead")]
    UseLoadMatrixInstead,

    #[error("landmark block has no eigenvalue above the inversion cutoff {cutoff:.3e}")]
    SingularLandmarkBlock { cutoff: f64 },

    #[error("invalid landmark budget: requested {requested} of {available}")]
    InvalidBudget { requested: usize, available: usize },

    #[error("sampling scores are all zero")]
    DegenerateScores,

    #[error("feature matrix is rank deficient (smallest singular value {smallest:.3e})")]
    RankDeficient { smallest: f64 },

    #[error("cannot build {folds} stratified folds: class counts {counts:?}")]
    Fold { folds: usize, counts: Vec<(String, usize)> },

    #[error("class {0:?} does not occur in the labels")]
    InvalidClass(String),

    #[error("{path}:{line}:{column}: {message}")]
    Parse {
        path: String,
        line: usize,
        column: usize,
        message: String,
    },

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn shape(msg: impl Into<String>) -> Self {
        Error::Shape(msg.into())
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    /// Process exit code used by the command-line harness.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::InvalidBudget { .. } | Error::UseLoadMatrixInstead => 2,
            Error::Solver { .. }
            | Error::SingularLandmarkBlock { .. }
            | Error::RankDeficient { .. }
            | Error::DegenerateSpectrum => 4,
            _ => 3,
        }
    }
}

/// Non-fatal conditions recorded on results instead of failing the call.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub enum Warning {
    ConstantFeature { column: usize },
    RankDeficient { effective_rank: usize, order: usize },
    DuplicateCollapse { requested: usize, selected: usize },
    DuplicateDraws { draws: usize, distinct: usize },
}
