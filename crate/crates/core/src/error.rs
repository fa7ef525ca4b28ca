use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("malformed spec: {0}")]
    Spec(String),

    #[error("curve is not strictly convex: min(h + h'') = {margin:.6e} at psi = {psi:.6}")]
    NotConvex { margin: f64, psi: f64 },

    #[error("Fourier truncation order {order} exceeds the maximum {max}")]
    TruncationTooLarge { order: usize, max: usize },

    #[error("origin is not an interior point: {0}")]
    OriginNotInterior(String),

    #[error("invalid polygon: {0}")]
    InvalidPolygon(String),

    #[error("gauge is not differentiable at the origin")]
    GaugeAtOrigin,

    #[error("operation requires a smooth body, got {0}")]
    NonSmoothBody(&'static str),

    #[error("wrong parametrization: expected {expected}, got {found}")]
    WrongParametrization { expected: String, found: String },

    #[error("curve parameter period must be 2*pi, got {0}")]
    PeriodNot2Pi(f64),

    #[error("function is not positive: min = {0:.6e}")]
    NonPositive(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("matrix is not of order {order}: {reason}")]
    NotFiniteOrder { order: usize, reason: String },

    #[error(
        "momentum {momentum:.6e} outside admissible range ({low:.6e}, {high:.6e}) at q = {q:.6}"
    )]
    OutsideBand {
        q: f64,
        momentum: f64,
        low: f64,
        high: f64,
    },

    #[error("twist condition violated near q = {q:.6}, Q = {q_next:.6}")]
    TwistViolated { q: f64, q_next: f64 },

    #[error("step {step}: {source}")]
    AtStep { step: usize, source: Box<Error> },

    #[error("{what} did not converge after {iterations} iterations (residual {residual:.3e})")]
    NoConvergence {
        what: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("periodic configuration left the monotone cone: {0}")]
    LostMonotonicity(String),

    #[error("tangency: {0}")]
    Tangency(String),

    #[error("point is not outside the curve")]
    NotExterior,

    #[error("tangent lines are (nearly) parallel: intersection beyond horizon")]
    ParallelTangents,

    #[error("tangent to an antipodal tangent: pair outside the admissible band")]
    OutsideSymplecticBand,

    #[error("curve is not invariant under the symmetry (residual {residual:.3e})")]
    NotSymmetric { residual: f64 },

    #[error(
        "criterion fails, no invariant family exists by the order-ak symmetry criterion ({0})"
    )]
    CriterionFails(String),

    #[error("family member at t = {t:.6} is not an orbit (residual {residual:.3e})")]
    MemberUnsolved { t: f64, residual: f64 },

    #[error("pole of tan within tolerance at x = {0}")]
    Pole(f64),

    #[error("sampled function is not increasing")]
    NotIncreasing,
}

impl Error {
    pub(crate) fn at_step(self, step: usize) -> Error {
        Error::AtStep {
            step,
            source: Box::new(self),
        }
    }
}
