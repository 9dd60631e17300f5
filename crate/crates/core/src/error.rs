use thiserror::Error;

/// Errors raised by the numerical and simulation layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("Airy evaluation outside the supported range |x| <= 100 (x = {0})")]
    AccuracyRange(f64),

    #[error("corrupted configuration: {0}")]
    Structure(String),

    #[error("path has no cone points")]
    NoConePoints,

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("height cap {cap} too small: {fraction:.3e} of the mass sits in the top 10% of the cap")]
    CapTooSmall { cap: usize, fraction: f64 },

    #[error("walk reaches negative height {height} at vertex {index}")]
    NegativeHeight { index: usize, height: i64 },

    #[error("bridge endpoint is unreachable (zero total weight)")]
    ZeroBridgeWeight,

    #[error("spectral tail {tail:.3e} exceeds tolerance {tolerance:.3e} with {modes} modes")]
    ModesInsufficient { modes: usize, tail: f64, tolerance: f64 },

    #[error("positivity violations at rate {rate:.3e} per step exceed 1e-4")]
    StepTooCoarse { rate: f64 },

    #[error("grid too coarse: {0}")]
    GridResolution(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("schema mismatch in {file} at row {row}, column {column}: {message}")]
    SchemaMismatch { file: String, row: u64, column: String, message: String },

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;
