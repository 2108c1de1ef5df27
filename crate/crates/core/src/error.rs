use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the interval, measure, energy and bound routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid length: {0}")]
    InvalidLength(String),

    #[error("level n={n} with log length {log_r} does not fit n disjoint intervals (requires log r < -log n)")]
    OverlappingLevel { n: u64, log_r: f64 },

    #[error("custom radius schedule has no entry for n={0}")]
    ScheduleLookup(u64),

    #[error("levels n={p} and n={q} overlap")]
    DisjointnessViolation { p: u64, q: u64 },

    #[error("zero mass: {0}")]
    ZeroMass(String),

    #[error("evaluation policy error: {0}")]
    Policy(String),

    #[error("geometry error: intervals touch or overlap (rho = {rho})")]
    Geometry { rho: f64 },

    #[error("invalid cutoff: delta {delta} must be below {limit}")]
    InvalidCutoff { delta: f64, limit: f64 },

    #[error("quadrature oracle failed: {0}")]
    OracleFailure(String),

    #[error("precondition violated at j={j}: {detail}")]
    Precondition { j: usize, detail: String },

    #[error("invalid measuring function: {0}")]
    InvalidMeasuringFunction(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
