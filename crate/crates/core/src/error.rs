use thiserror::Error;

/// Errors raised by the library. Rejected MCMC proposals are never errors;
/// they are folded into the sampler's acceptance counters.
#[derive(Debug, Error)]
pub enum GarmaError {
    #[error("invalid series: {0}")]
    InvalidSeries(String),

    #[error("invalid family: {0}")]
    InvalidFamily(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("linear predictor is not finite at t = {t}")]
    NonFiniteEta { t: usize },

    #[error("non-finite conditional mean while simulating step {step}")]
    Generation { step: usize },

    #[error("empty sample: {0}")]
    EmptySample(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl GarmaError {
    /// True for errors caused by bad user input rather than by a failure at
    /// run time. The CLI maps these to exit code 2.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            GarmaError::InvalidSeries(_)
                | GarmaError::InvalidFamily(_)
                | GarmaError::InvalidConfig(_)
                | GarmaError::Dimension(_)
                | GarmaError::Parse(_)
        )
    }
}

pub type Result<T, E = GarmaError> = std::result::Result<T, E>;
