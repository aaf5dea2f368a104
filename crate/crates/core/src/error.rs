use thiserror::Error;

/// Errors produced anywhere in the reconstruction pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("matrix is singular: pivot magnitude {pivot:e} at elimination step {step}")]
    SingularMatrix { step: usize, pivot: f64 },

    #[error("matrix is empty")]
    EmptyMatrix,

    #[error("degenerate grid: {0}")]
    DegenerateGrid(String),

    #[error("wave speed must be strictly positive (minimum sampled value {0})")]
    NonPositiveSpeed(f64),

    #[error("time step {dt} exceeds the CFL bound {bound}")]
    CflViolation { dt: f64, bound: f64 },

    #[error("system is near-singular (condition estimate {condition:e}); lambda is at or near a Neumann eigenvalue")]
    NearSingularSystem { condition: f64 },

    #[error("travel time {tau_max} across the domain is not below the horizon {horizon}")]
    NotControllable { tau_max: f64, horizon: f64 },

    #[error("noise level {0} requires an RNG seed")]
    MissingSeed(f64),

    #[error("reference map has zero norm")]
    ZeroTruth,

    #[error("nothing to run: {0}")]
    NoWork(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// True for failures caused by the numerics rather than by the inputs or the filesystem.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::SingularMatrix { .. }
                | Error::NearSingularSystem { .. }
                | Error::CflViolation { .. }
                | Error::ZeroTruth
        )
    }

    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io(_) | Error::Csv(_))
    }
}
