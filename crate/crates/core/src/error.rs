//! Error type shared by every module.

use thiserror::Error;

/// Failures raised by the geometry, obstruction and gluing routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeomError {
    #[error("point {point:?} lies outside the chart domain (required margin {margin})")]
    PointOutsideDomain { point: Vec<f64>, margin: f64 },

    #[error("metric is singular or not positive definite at {point:?}")]
    SingularMetric { point: Vec<f64> },

    #[error("valence mismatch: expected {expected}, found {found}")]
    ValenceMismatch { expected: String, found: String },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("u must be positive, got {0}")]
    NonPositiveU(f64),

    #[error("the origin is excluded from the complex chart")]
    ZeroPoint,

    #[error("radial chart touches the zero section (r = {0})")]
    TouchesZeroSection(f64),

    #[error("complex dimension must satisfy n >= 2, got {0}")]
    BadComplexDimension(usize),

    #[error("insufficient radii: {0}")]
    InsufficientRadii(String),

    #[error("odd real dimension {0} is not supported")]
    OddDimension(usize),

    #[error("invalid curvature data: {0}")]
    InvalidCurvatureData(String),

    #[error("quadrature budget too small: {0}")]
    QuadratureBudget(String),

    #[error("invalid branch {branch} for operator {operator}")]
    InvalidBranch { operator: String, branch: String },

    #[error("radius must be positive, got {0}")]
    NonPositiveRadius(f64),

    #[error("dimension m = {0} is too small (need m >= 3)")]
    DimensionTooSmall(usize),

    #[error("gluing parameter t = {t} is too large: metric not positive definite at {point:?}")]
    TTooLarge { t: f64, point: Vec<f64> },

    #[error("insufficient t range: {0}")]
    InsufficientTRange(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("failed to read curvature data: {0}")]
    Io(String),

    #[error("failed to parse curvature data: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, GeomError>;
