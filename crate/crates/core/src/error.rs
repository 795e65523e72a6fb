use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("input {x} V is outside the map domain [{lo}, {hi}]")]
    InputOutOfRange { x: f64, lo: f64, hi: f64 },

    #[error("input {x} V is outside the tabulated knot range [{lo}, {hi}]; extrapolation is not supported")]
    Extrapolation { x: f64, lo: f64, hi: f64 },

    #[error("surrogate is not conjugate to the logistic map (gamma = {gamma}, must be 0)")]
    NotConjugate { gamma: f64 },

    #[error("invalid {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("row {row}: {message}")]
    Parse { row: u64, message: String },

    #[error("insufficient knots: found {found}, need at least 4")]
    InsufficientKnots { found: usize },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("search grid has {size} cells, above the cap of {cap}")]
    GridTooLarge { size: u128, cap: u128 },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("write failed: {0}")]
    Write(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
