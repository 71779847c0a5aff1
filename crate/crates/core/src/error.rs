use std::fmt;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("dyadic index {index} outside resolvable window [{min}, {max}]")]
    DyadicRange { index: i32, min: i32, max: i32 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid flux: {0}")]
    InvalidFlux(String),

    #[error("non-finite value encountered at t = {t}: {what}")]
    Divergence { t: f64, what: String },

    #[error("time step {dt:e} violates the CFL bound; use dt <= {admissible:e}")]
    Cfl { dt: f64, admissible: f64 },

    #[error("missing tracker(s): {}", .0.join(", "))]
    MissingTrackers(Vec<String>),

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error("malformed input: {0}")]
    Format(String),

    #[error("experiment failed: {0}")]
    Experiment(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn config(path: impl fmt::Display, message: impl fmt::Display) -> Self {
        Error::Config {
            path: path.to_string(),
            message: message.to_string(),
        }
    }
}
