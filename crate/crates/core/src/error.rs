use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("need at least {needed} points, found {found}")]
    TooFewPoints { needed: usize, found: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("quadrature did not converge after {nodes} nodes (error estimate {error:e})")]
    Quadrature { nodes: usize, error: f64 },

    #[error("no sign change for d={dim}, mu={mu}, N={big_n} within the expanded bracket")]
    NoSignChange { dim: usize, mu: f64, big_n: f64 },

    #[error("root finder stalled after {iterations} iterations with residual {residual:e}")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("radius solve failed for d={dim}, mu={mu}: {source}")]
    Sweep {
        dim: usize,
        mu: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("diverged at step {step}")]
    Divergence { step: usize },

    #[error("non-finite loss at epoch {epoch}, step {step}")]
    TrainingDiverged { epoch: usize, step: usize },

    #[error("malformed input at byte offset {offset}: {message}")]
    Format { offset: usize, message: String },

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for failures of a numerical procedure (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::Quadrature { .. }
            | Error::NoSignChange { .. }
            | Error::NotConverged { .. }
            | Error::Divergence { .. }
            | Error::TrainingDiverged { .. } => true,
            Error::Sweep { source, .. } => source.is_numerical(),
            _ => false,
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
