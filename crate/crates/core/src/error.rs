use thiserror::Error;

/// Errors raised by the numerical routines in this crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("index {index} out of range (truncation {truncation})")]
    Index { index: usize, truncation: usize },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("parameter error: {0}")]
    Parameter(String),

    #[error("multiplier undefined at spectral value {at}")]
    Domain { at: f64 },

    #[error("envelope fit failed: {0}")]
    Fit(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("cubature failure at center {center} (x = {point}): weight {weight} outside [{lower}, {upper}]")]
    Cubature {
        center: usize,
        point: f64,
        weight: f64,
        lower: f64,
        upper: f64,
    },

    #[error("cut-off construction error: {0}")]
    Construction(String),

    #[error("dual construction failed at level {level}: |R| = {r_norm} >= 1/2; use a smaller gamma")]
    DualConstruction { level: usize, r_norm: f64 },

    #[error("coefficient set does not match the frame index set")]
    IndexMismatch,

    #[error("frame file format error: {0}")]
    Format(String),

    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
