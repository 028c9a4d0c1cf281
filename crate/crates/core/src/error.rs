use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("time {t} outside driver domain [0, {horizon}]")]
    OutOfDomain { t: f64, horizon: f64 },

    #[error("invalid samples: {0}")]
    InvalidSamples(String),

    #[error(
        "driver seminorm {sigma} is not below 4; enable supercritical mode to integrate anyway"
    )]
    Supercritical { sigma: f64 },

    #[error("step budget of {limit} substeps exhausted at s = {s}")]
    StepBudget { limit: usize, s: f64 },

    #[error("point swallowed at t = {t} (distance to driver {distance:e})")]
    Swallowed { t: f64, distance: f64 },

    #[error("integrator failed at t = {t}: {reason}")]
    StepFailure { t: f64, reason: String },

    #[error("trajectory is not monotone in Y at index {index}")]
    NonMonotone { index: usize },

    #[error("fit failed: {0}")]
    Fit(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn context(self, context: impl Into<String>) -> Error {
        Error::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
