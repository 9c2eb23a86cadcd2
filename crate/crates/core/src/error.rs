use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("non-finite value {value} produced at node ({x}, {y}, {z})")]
    NonFinite { x: f64, y: f64, z: f64, value: f64 },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("malformed field file {path}: {reason}")]
    MalformedFile { path: PathBuf, reason: String },

    #[error("boundary data violates the coercive setting: {0}")]
    BoundaryData(String),

    #[error("domain too small for the defining function: {reason} (Ω must contain the gauge ball of radius {required_radius:.4})")]
    Clearance { required_radius: f64, reason: String },

    #[error("outer iterates lost monotonicity at step {outer}: increase of {violation:e}")]
    Monotonicity { outer: usize, violation: f64 },

    #[error("set inclusion violated: {0}")]
    NotContained(String),

    #[error("empty set: {0}")]
    Empty(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("config key `{key}`: {reason}")]
    Config { key: String, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
