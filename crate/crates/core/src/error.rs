use thiserror::Error;

pub type Result<T> = std::result::Result<T, SddError>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SddError {
    #[error("{function} is undefined for argument {arg} (requires x > 0)")]
    Domain { function: &'static str, arg: f64 },

    #[error("concentration vector needs at least 2 components, got {0}")]
    TooFewComponents(usize),

    #[error("concentration alpha[{index}] = {value} is not a positive finite number")]
    InvalidAlpha { index: usize, value: f64 },

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("coordinate x[{index}] = {value} is negative or not finite")]
    NegativeCoordinate { index: usize, value: f64 },

    #[error("point is not on the unit sphere: |sum x^2 - 1| = {deviation:e}")]
    NotUnitNorm { deviation: f64 },

    #[error("density is infinite: x[{index}] = 0 with alpha[{index}] = {alpha} < 1/2")]
    InfiniteDensity { index: usize, alpha: f64 },

    #[error("mode is undefined: alpha[{index}] = {alpha} <= 1/2")]
    ModeUndefined { index: usize, alpha: f64 },

    #[error("row {row}: {reason}")]
    InvalidRow { row: usize, reason: String },

    #[error("sample is empty")]
    EmptySample,

    #[error(
        "sufficient statistic for column {column} is not finite (zero coordinates present); \
         apply the log-shift transform before fitting"
    )]
    NonFiniteSuffStats { column: usize },

    #[error("empirical moment {name} = {value} lies outside (0, 1)")]
    MomentOutOfRange { name: &'static str, value: f64 },

    #[error("root bracket failure: no sign change on [{lower:e}, {upper:e}]")]
    BracketFailure { lower: f64, upper: f64 },

    #[error("objective or gradient not finite at {context}")]
    NonFinite { context: &'static str },

    #[error("invalid box: lower[{index}] = {lower} is not below upper[{index}] = {upper}")]
    InvalidBox {
        index: usize,
        lower: f64,
        upper: f64,
    },

    #[error("start point is outside the box at coordinate {index}")]
    StartOutsideBox { index: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
