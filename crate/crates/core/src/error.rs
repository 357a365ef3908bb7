use thiserror::Error;

/// Errors raised while ingesting data or computing estimators.
#[derive(Debug, Error)]
pub enum Error {
    #[error("row {row}: status must be 0 or 1, got `{value}`")]
    InvalidStatus { row: usize, value: String },
    #[error("row {row}: column `{column}` is not a finite number (`{value}`)")]
    NonFinite {
        row: usize,
        column: String,
        value: String,
    },
    #[error("row {row}: expected {expected} fields, found {found}")]
    RaggedRow {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("header must start with `time,status` followed by at least one predictor, got `{0}`")]
    BadHeader(String),
    #[error("predictor column {index} (`{name}`) is constant")]
    ConstantColumn { index: usize, name: String },
    #[error("at least 2 observations are required, got {n}")]
    TooFewObservations { n: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("stratum {label} has no members")]
    EmptyStratum { label: usize },
    #[error("stratum {label} has no subject still at risk at tau = {tau}")]
    NoSubjectAtRisk { label: usize, tau: f64 },
    #[error(
        "censoring survival {g:e} at event time {x} (observation {row}) is below the weight floor; tau is likely too large"
    )]
    WeightBlowUp { row: usize, x: f64, g: f64 },
    #[error("variance of {what} is {value:e}, below the floor")]
    VarianceBelowFloor { what: String, value: f64 },
    #[error("influence-function standard deviation {sigma:e} at prefix size {j} is below the floor")]
    DegenerateInfluence { j: usize, sigma: f64 },
    #[error("the two one-step forms disagree: {plugin_form} vs {direct_form}")]
    FormMismatch { plugin_form: f64, direct_form: f64 },
    #[error("censoring-rate calibration failed for target {target}")]
    CalibrationFailed { target: f64 },
    #[error("replicate with seed {seed} failed: {source}")]
    Replicate {
        seed: u64,
        #[source]
        source: Box<Error>,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for failures caused by numerical degeneracy of the data rather
    /// than malformed input.
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::WeightBlowUp { .. }
            | Error::VarianceBelowFloor { .. }
            | Error::DegenerateInfluence { .. }
            | Error::FormMismatch { .. }
            | Error::CalibrationFailed { .. } => true,
            Error::Replicate { source, .. } => source.is_numerical(),
            _ => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
