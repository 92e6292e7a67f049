use thiserror::Error;

/// Errors shared by every module of the toolkit.
#[derive(Debug, Error)]
pub enum AleError {
    #[error("non-metric profile: {0}")]
    NonMetricProfile(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("outside solvable neighborhood: {0}")]
    OutsideSolvableNeighborhood(String),

    #[error("non-integrable at given weight: {0}")]
    NonIntegrableWeight(String),

    #[error("weight outside window ({lo}, {hi}): beta = {beta}")]
    WeightOutsideWindow { beta: f64, lo: f64, hi: f64 },

    #[error("numerical divergence: {0}")]
    NumericalDivergence(String),

    #[error("mass undefined at this decay: {0}")]
    MassUndefined(String),

    #[error("unsupported mode: {0}")]
    UnsupportedMode(String),

    #[error("non-monotone radial map: {0}")]
    NonMonotoneMap(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, AleError>;
