use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid root system: {0}")]
    InvalidRootSystem(String),

    #[error("point outside the open Weyl chamber (min root value {min_root_value:e})")]
    OutsideChamber { min_root_value: f64 },

    #[error("non-regular point: {0}")]
    NonRegular(String),

    #[error("invalid point: {0}")]
    InvalidPoint(String),

    #[error("wall collision on path {path} at t={time}: substep limit exhausted")]
    WallCollision { path: usize, time: f64 },

    #[error("non-finite value on path {path} at t={time}")]
    NumericalFault { path: usize, time: f64 },

    #[error("insufficient samples: need at least {needed}, got {got}")]
    InsufficientSamples { needed: usize, got: usize },

    #[error("grid error: {0}")]
    Grid(String),

    #[error("{what} did not converge after {iterations} iterations")]
    NonConvergence { what: String, iterations: usize },

    #[error("wall events on {events} of {total} paths exceed the {limit:.2}% budget")]
    ExcessiveWallEvents {
        events: usize,
        total: usize,
        limit: f64,
    },

    #[error("requested time {0} is not on the stored grid")]
    TimeNotOnGrid(f64),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
