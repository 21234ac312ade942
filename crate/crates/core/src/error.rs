use thiserror::Error;

pub type Result<T> = std::result::Result<T, KssError>;

#[derive(Debug, Error)]
pub enum KssError {
    #[error("degree must be at least 2, got {0}")]
    InvalidDegree(u64),

    #[error("number of equations must be at least {min}, got {got}")]
    InvalidDimension { got: usize, min: usize },

    #[error("point is not on the unit sphere (norm {0})")]
    NonUnitPoint(f64),

    #[error("{name} = {value} lies outside [{lo}, {hi}]")]
    OutOfRange {
        name: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("polynomial is identically zero")]
    ZeroPolynomial,

    #[error("leading coefficient vanishes; the sample must be redrawn")]
    DegenerateLeading,

    #[error("quadrature did not converge: estimated error {error:e} exceeds tolerance {tolerance:e}")]
    Quadrature { error: f64, tolerance: f64 },

    #[error("special-function series did not converge: {0}")]
    Series(String),

    #[error("multinomial weights overflow f64 at degree {0}")]
    Overflow(u64),

    #[error("operation requires a system in {expected} form")]
    WrongForm { expected: &'static str },

    #[error("invalid system: {0}")]
    InvalidSystem(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
