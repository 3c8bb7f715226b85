use thiserror::Error;

/// Failure modes shared by every module. Display strings are the stable
/// identifiers that show up in JSON reports.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("empty-region")]
    EmptyRegion,
    #[error("disconnected-region")]
    DisconnectedRegion,
    #[error("grid-mismatch")]
    GridMismatch,
    #[error("resolution: {0}")]
    Resolution(String),
    #[error("graphs-cross at ({x}, {y}): f1 - f2 = {gap}")]
    GraphsCross { x: f64, y: f64, gap: f64 },
    #[error("bad-derivatives: {0}")]
    BadDerivatives(String),
    #[error("outside-region")]
    OutsideRegion,
    #[error("not-boundary")]
    NotBoundary,
    #[error("unknown corpus entry '{0}'")]
    UnknownCorpus(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("no-Sprime-radius")]
    NoSprimeRadius,
    #[error("kernel-underresolved: radius {radius} < 3h = {min}")]
    KernelUnderresolved { radius: f64, min: f64 },
    #[error("collar-resolution: {0}")]
    CollarResolution(String),
    #[error("support-violation: v = {value} at distance {dist} from the boundary")]
    SupportViolation { value: f64, dist: f64 },
    #[error("symmetric-surface")]
    SymmetricSurface,
    #[error("derivative failure: {0}")]
    Derivative(String),
    #[error("tolerance failure: {0}")]
    Tolerance(String),
    #[error("invalid curve: {0}")]
    InvalidCurve(String),
}

pub type Result<T> = std::result::Result<T, Error>;
