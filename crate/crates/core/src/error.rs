use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors raised by field evaluation and the geometric operations.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("evaluation at {point:?} violates the singular-set margin {margin}")]
    SingularEvaluation { point: Vec<f64>, margin: f64 },

    #[error("field returned a non-finite value at {point:?}")]
    NonFinite { point: Vec<f64> },

    #[error("weight must be positive; got {value} at {point:?}")]
    NonPositiveWeight { point: Vec<f64>, value: f64 },

    #[error("curvature must be positive; got {value} at s = {s}")]
    NonPositiveCurvature { s: f64, value: f64 },

    #[error("curvature at s = {s} is below {min}; torsion is undefined")]
    VanishingCurvature { s: f64, min: f64 },

    #[error("curve is not arclength parametrized: |gamma'({s})| = {speed}")]
    NotArclength { s: f64, speed: f64 },

    #[error("first fundamental form degenerate at (u, v) = ({u}, {v}): det = {det:e}")]
    DegenerateMetric { u: f64, v: f64, det: f64 },

    #[error("grid of {size} points exceeds the dense-solve limit of {max}")]
    GridTooLarge { size: usize, max: usize },

    #[error("step {step} exceeds the limit {max} for this interval")]
    StepTooLarge { step: f64, max: f64 },

    #[error("initial frame is not orthonormal (max deviation {deviation:e})")]
    FrameNotOrthonormal { deviation: f64 },

    #[error("s = {s} is too close to the boundary of [{lo}, {hi}] for the stencil")]
    OutOfDomain { s: f64, lo: f64, hi: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}
