use alloc::boxed::Box;
use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("shape parameter must be positive and finite, got {0}")]
    NonPositiveShape(f64),
    #[error("unknown chart id {0}")]
    UnknownChart(usize),
    #[error("parameter ({xi0}, {xi1}) lies outside the rectangle of chart {chart}")]
    ParameterOutOfRange { chart: usize, xi0: f64, xi1: f64 },
    #[error("grid {n}x{k} too coarse for basis degree {degree}: need n, k >= {}", .degree + 1)]
    GridTooCoarse { n: usize, k: usize, degree: usize },
    #[error("expected {expected} subdivision pairs (one per chart), got {got}")]
    SubdivisionCount { expected: usize, got: usize },
    #[error("basis degree {degree} is not supported here ({reason})")]
    UnsupportedDegree { degree: usize, reason: &'static str },
    #[error("grid was built for degree {grid} but the basis has degree {basis}")]
    DegreeMismatch { grid: usize, basis: usize },
    #[error("index {index} outside {lo}..={hi}")]
    IndexOutOfRange { index: i64, lo: i64, hi: i64 },
    #[error("evaluation point {0} outside the spline interval")]
    OutsideInterval(f64),
    #[error("Gauss order {0} outside 1..=30")]
    GaussOrder(usize),
    #[error("atlas error: {0}")]
    Atlas(String),
    #[error("collocation points {0} and {1} coincide")]
    CoincidentPoints(usize, usize),
    #[error("collocation point {inside} lies in the δ-neighbourhood of point {center}")]
    NeighborhoodOverlap { center: usize, inside: usize },
    #[error("point lies on the surface (distance {0:e}); potential is only evaluated off Γ")]
    PointOnSurface(f64),
    #[error("distance δ must be positive, got {0}")]
    NonPositiveDistance(f64),
    #[error("Cholesky factorization failed at pivot {pivot} (value {value:e}); matrix is not SPD")]
    CholeskyFailed { pivot: usize, value: f64 },
    #[error("matrix is singular at pivot {pivot}; condition estimate {condition:e}")]
    SingularMatrix { pivot: usize, condition: f64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("solve residual {residual:e} exceeds tolerance {tolerance:e}")]
    Residual { residual: f64, tolerance: f64 },
    #[error("a convergence study needs at least 2 levels, got {0}")]
    TooFewLevels(usize),
    #[error("source point must lie inside the surface at distance >= {min:e}, got {distance:e}")]
    SourcePlacement { distance: f64, min: f64 },
    #[error("level {level} failed (condition estimate {condition:e}): {source}")]
    LevelFailed {
        level: usize,
        condition: f64,
        #[source]
        source: Box<Error>,
    },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
