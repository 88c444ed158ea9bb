use std::io;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors surfaced by data ingestion, model fitting, sampling, and the
/// simulation harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),

    /// Malformed CSV content. `line` is 1-based and counts the header row.
    #[error("{reason} at line {line}")]
    Csv { line: usize, reason: String },

    #[error("invalid data: {0}")]
    InvalidData(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// The partial likelihood does not depend on theta (every risk set has a
    /// constant covariate), so no maximizer exists.
    #[error("likelihood constant in theta")]
    ConstantLikelihood,

    /// Newton iterates escaped [-50, 50]; the likelihood increases toward
    /// infinity and has no finite maximizer.
    #[error("monotone likelihood: |theta| exceeded 50 without a stationary point")]
    MonotoneLikelihood,

    /// Inner jump-size maximization diverged: the supremum sits on the
    /// boundary of the parameter set.
    #[error("degenerate NPMLE")]
    DegenerateNpmle,

    #[error("no bracket for the profile maximum in [{lo}, {hi}]")]
    BracketNotFound { lo: f64, hi: f64 },

    #[error("event fraction {target} not reachable for censor horizons in [{lo}, {hi}]")]
    TuningNotBracketed { target: f64, lo: f64, hi: f64 },

    /// The discretized second difference came out nonpositive: either the
    /// expansion point is not a maximizer or the step is too large.
    #[error("negative curvature estimate")]
    NegativeCurvature,

    #[error("log-posterior not finite at chain start ({at})")]
    NonFiniteLogPost { at: f64 },

    #[error("too few draws: {got} (need at least {need})")]
    TooFewDraws { got: usize, need: usize },

    #[error("did not converge: {0}")]
    NoConvergence(String),

    #[error("study aborted: {failed} of {total} replications failed (more than 5%)")]
    TooManyFailures { failed: usize, total: usize },
}

impl Error {
    /// True for numeric/model failures (CLI exit code 2), false for usage,
    /// parse, and i/o problems (CLI exit code 1).
    pub fn is_numeric(&self) -> bool {
        !matches!(
            self,
            Error::Io(_) | Error::Csv { .. } | Error::InvalidConfig(_)
        )
    }
}
