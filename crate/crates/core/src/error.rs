use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("grid size must be at least 1")]
    EmptyGrid,

    #[error("mode count {pmax} aliases on a grid of {n} points (usable band is p <= {max_usable})")]
    Aliasing {
        pmax: usize,
        n: usize,
        max_usable: usize,
    },

    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("shape mismatch: expected {expected:?}, found {found:?}")]
    ShapeMismatch {
        expected: (usize, usize),
        found: (usize, usize),
    },

    #[error("non-finite value at index {index}")]
    NonFiniteValue { index: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("diffusion coefficient {value} at sample {index} is below the ellipticity floor {floor}")]
    NonElliptic { index: usize, value: f64, floor: f64 },

    #[error("boundary condition violated: u({x}, {t}) = {value}")]
    BoundaryViolation { x: f64, t: f64, value: f64 },

    #[error("solver produced a non-finite state at {direction} time {time}")]
    NonFiniteState { direction: &'static str, time: f64 },

    #[error("solver unstable at t = {time}: {reason}")]
    Unstable { time: f64, reason: String },

    #[error("time {t} lies outside [0, {final_time}]")]
    TimeOutOfRange { t: f64, final_time: f64 },

    #[error("rate fit needs at least {needed} ladder points, got {found}")]
    InsufficientPoints { needed: usize, found: usize },

    #[error("rate fit requires positive means, got {value} at n = {n}")]
    NonPositiveMean { n: usize, value: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("trial {trial} at n = {n} failed: {source}")]
    Trial {
        n: usize,
        trial: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: malformed CSV: {message}")]
    Csv { path: PathBuf, message: String },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
