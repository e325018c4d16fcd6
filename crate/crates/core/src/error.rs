use thiserror::Error;

pub type Result<T, E = CfpError> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CfpError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("vector must have at least one coordinate")]
    EmptyVector,

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("circumcenter undefined: points are collinear and pairwise distinct")]
    DegenerateCircumcenter,

    #[error("invalid set: {0}")]
    InvalidSet(String),

    #[error("no exact projector for {0}")]
    NoExactProjector(&'static str),

    #[error("no level-function oracle for {0}")]
    NoOracle(&'static str),

    #[error("ellipsoid projection multiplier search did not converge in {iterations} iterations")]
    NewtonStall { iterations: usize },

    #[error("gradient vanishes at a point outside the set")]
    ZeroGradient,

    #[error("point is not in the affine subspace (residual {residual:e})")]
    NotInSubspace { residual: f64 },

    #[error("trace too short: need at least {needed} usable iterates, found {found}")]
    InsufficientTrace { needed: usize, found: usize },

    #[error("no distance oracle for the solution set of this problem")]
    NoIntersectionOracle,

    #[error("radial closed form is singular at the origin")]
    RadialSingularity,

    #[error("family hypothesis violated: {0}")]
    HypothesisViolation(String),

    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },

    #[error("result set is empty")]
    EmptyResult,

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for CfpError {
    fn from(e: std::io::Error) -> Self {
        CfpError::Io(e.to_string())
    }
}

impl From<csv::Error> for CfpError {
    fn from(e: csv::Error) -> Self {
        CfpError::Io(e.to_string())
    }
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(CfpError::DimensionMismatch { expected, found })
    }
}
