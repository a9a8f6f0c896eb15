use thiserror::Error;

/// Numerical-domain failures raised by the geometry and solver modules.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("inflection/straight segment at s = {s}: curvature {kappa:e} is below the resolvable threshold {threshold:e}")]
    StraightSegment { s: f64, kappa: f64, threshold: f64 },

    #[error("zero speed at parameter t = {t}: |dx/dt| = {speed:e}")]
    ZeroSpeed { t: f64, speed: f64 },

    #[error("cumulative arclength is not strictly increasing at sample {index} (t = {t})")]
    NonMonotoneArclength { index: usize, t: f64 },

    #[error("arclength {s} is outside the curve range [0, {length}]")]
    OutOfRange { s: f64, length: f64 },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("metric is invalid (1 - R kappa cos(theta) <= 0) at {count} grid point(s), first: {points:?}")]
    InvalidMetricRegion { count: usize, points: Vec<[f64; 3]> },

    #[error("triad is degenerate at (s, chi, phi) = ({s}, {chi}, {phi}): triple product {triple:e}")]
    DegenerateTriad { s: f64, chi: f64, phi: f64, triple: f64 },

    #[error("degenerate: tau* = 0, toroidal component forced to zero under unstretching (Gamma_132 = {gamma_132:e})")]
    NoDynamoDegenerate { gamma_132: f64 },

    #[error("unphysical shrink-through-zero: R({s}) = {radius} <= 0 (analytic crossing at s = {crossing:?})")]
    ShrinkThroughZero { s: f64, radius: f64, crossing: Option<f64> },

    #[error("tube-validity boundary: 1 - R kappa0 cos(theta) = {denominator:e}")]
    ValidityBoundary { denominator: f64 },

    #[error("input field is not solenoidal: |div| = {divergence:e} at {point:?}")]
    NonSolenoidal { divergence: f64, point: [f64; 3] },

    #[error("precondition violated: {0}")]
    Precondition(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
