use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("no real image: object distance {p} m is not beyond focal length {f} m")]
    NoRealImage { f: f64, p: f64 },

    #[error("detector Gram matrix is not positive: {0}")]
    InvalidGram(String),

    #[error("invalid basis: {0}")]
    InvalidBasis(String),

    #[error("null field")]
    NullField,

    #[error("invalid extrema: i_min = {i_min} exceeds i_max = {i_max}")]
    InvalidExtrema { i_max: f64, i_min: f64 },

    #[error("inconsistent grid: {0}")]
    InconsistentGrid(String),

    #[error("precondition violated: {0}")]
    PreconditionViolated(String),

    #[error("insufficient sampling: {0}")]
    InsufficientSampling(String),

    #[error("no fringes: {0}")]
    NoFringes(String),

    #[error("out of domain: {0}")]
    OutOfDomain(String),

    #[error("unresolved spots: window half-width {half_width} m overlaps spot separation {separation} m")]
    UnresolvedSpots { half_width: f64, separation: f64 },

    #[error("insufficient statistics: {0}")]
    InsufficientStatistics(String),

    #[error("near node at x = {x} (|psi| = {magnitude:e})")]
    NearNode { x: f64, magnitude: f64 },

    #[error("trajectory escaped the grid at z = {z} m, x = {x} m")]
    EscapedDomain { z: f64, x: f64 },

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
