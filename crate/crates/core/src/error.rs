use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("ensemble needs at least 2 agents, got {0}")]
    InvalidSize(usize),

    #[error("lattice side {side} does not tile {n} agents (side² = {})", side * side)]
    TopologyMismatch { side: usize, n: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("shape mismatch: expected length {expected}, got {actual}")]
    ShapeError { expected: usize, actual: usize },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("series is not decaying over the fit window (slope {slope:e})")]
    NotDecaying { slope: f64 },

    #[error("fit window contains a crossing of the equilibrium value at t = {t}")]
    WindowContainsCrossing { t: u64 },

    #[error("non-positive value {value} at t = {t} cannot be log-transformed")]
    LogDomainError { t: u64, value: f64 },

    #[error("no window of at least {min_points} points is distinguishable from equilibrium")]
    NoDecayWindow { min_points: usize },

    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Short machine-readable tag, used in the status column of fit reports.
    pub fn tag(&self) -> &'static str {
        match self {
            Error::InvalidSize(_) => "InvalidSize",
            Error::TopologyMismatch { .. } => "TopologyMismatch",
            Error::InvalidParameter(_) => "InvalidParameter",
            Error::ShapeError { .. } => "ShapeError",
            Error::InsufficientData(_) => "InsufficientData",
            Error::NotDecaying { .. } => "NotDecaying",
            Error::WindowContainsCrossing { .. } => "WindowContainsCrossing",
            Error::LogDomainError { .. } => "LogDomainError",
            Error::NoDecayWindow { .. } => "NoDecayWindow",
            Error::Config(_) => "Config",
            Error::Io { .. } => "Io",
            Error::Csv(_) => "Csv",
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
