//! Error type shared by every module of the workbench.

use std::path::PathBuf;

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// All failure modes of the workbench.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A precondition on an argument was violated.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// An optimizer or a whole selection grid failed to produce a usable fit.
    /// Carries the best parameter vector seen and its objective value.
    #[error("convergence failure: {reason} (best objective {objective})")]
    ConvergenceFailure {
        reason: String,
        /// Flattened `(c, phi.., theta..)` at the best point found.
        best: Vec<f64>,
        objective: f64,
    },

    /// A completion contained no parseable value.
    #[error("decode failure: {0}")]
    DecodeFailure(String),

    /// Every scaling configuration in a tuning grid failed to score.
    #[error("tuning failure: {0}")]
    TuningFailure(String),

    /// Transport-level failure that survived all retries.
    #[error("provider unavailable after {attempts} attempt(s): {detail}")]
    ProviderUnavailable { detail: String, attempts: u32 },

    /// The provider refused the request for quota reasons.
    #[error("rate limited: {detail}")]
    RateLimited {
        detail: String,
        /// Seconds to wait before retrying, when the provider said so.
        retry_after: Option<f64>,
    },

    /// The provider answered with something that is not the expected shape.
    #[error("protocol error: {0}")]
    Protocol(String),

    /// Fewer valid samples decoded than the configured minimum.
    #[error("forecast failure: {num_invalid} of {num_samples} samples were unusable")]
    ForecastFailure {
        num_invalid: usize,
        num_samples: usize,
    },

    /// File could not be read or written.
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// A required column or field is missing from an input file.
    #[error("schema error: {0}")]
    Schema(String),

    /// A cell of an input file could not be interpreted.
    #[error("data error: {0}")]
    Data(String),

    /// The experiment configuration is unusable.
    #[error("config error: {0}")]
    Config(String),

    /// Every cell of an experiment failed.
    #[error("experiment failure: {0}")]
    ExperimentFailure(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code mandated by the CLI contract.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Schema(_) => 2,
            _ => 1,
        }
    }
}
