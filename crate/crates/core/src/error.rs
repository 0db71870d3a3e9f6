use thiserror::Error;

/// Errors shared across the measure, decomposition, simulation and solver
/// layers.
#[derive(Error, Debug)]
pub enum Error {
    #[error("grid too coarse: spacing {spacing} exceeds limit {limit}")]
    GridTooCoarse { spacing: f64, limit: f64 },

    #[error("atom at {position:?} lies outside the padded grid box")]
    OutOfDomain { position: Vec<f64> },

    #[error("empty measure")]
    EmptyMeasure,

    #[error("density is zero or has non-positive mass")]
    ZeroDensity,

    #[error("singular kernel: {0}")]
    SingularKernel(String),

    #[error("component separation violated: {0}")]
    Separation(String),

    #[error("path horizon mismatch: expected {expected}, got {got}")]
    HorizonMismatch { expected: f64, got: f64 },

    #[error("step budget exceeded: {steps} steps > budget {budget}")]
    StepBudget { steps: u64, budget: u64 },

    #[error("mass constraint violated: {0}")]
    MassConstraint(String),

    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimMismatch { expected: usize, got: usize },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
