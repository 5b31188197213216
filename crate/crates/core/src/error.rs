use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("weather file: {0}")]
    WeatherFormat(String),

    #[error("invalid sample at row {row}, column `{column}`")]
    InvalidSample { row: usize, column: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("value out of range: {0}")]
    OutOfRange(String),

    #[error("non-finite input: {0}")]
    NonFinite(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("rank-deficient regression for zone {zone} (condition {condition:e})")]
    RankDeficient { zone: String, condition: f64 },

    #[error("battery SOC {soc:.6}% would leave [{min}, {max}]%")]
    SocBounds { soc: f64, min: f64, max: f64 },

    #[error("solver failure: {0}")]
    Solver(String),

    #[error("step {step}: {source}")]
    AtStep {
        step: usize,
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
    pub(crate) fn at_step(step: usize, source: Error) -> Self {
        Error::AtStep {
            step,
            source: Box::new(source),
        }
    }

    /// True for failures raised by the optimizer or by a model blow-up inside it.
    pub fn is_solver_failure(&self) -> bool {
        match self {
            Error::Solver(_) => true,
            Error::AtStep { source, .. } => source.is_solver_failure(),
            _ => false,
        }
    }
}
