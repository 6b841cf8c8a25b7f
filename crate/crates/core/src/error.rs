use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("size mismatch: expected {expected} entries, found {found}")]
    SizeMismatch { expected: usize, found: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("time step {dt} violates the explicit feedback bound dt < 2/mu = {bound}")]
    Unstable { dt: f64, mu: f64, bound: f64 },

    #[error("observer cutoff {cutoff} exceeds the dealiased band {band}")]
    CutoffTooLarge { cutoff: usize, band: usize },

    #[error("{trajectory} trajectory blew up at t = {time}")]
    BlowUp { trajectory: String, time: f64 },

    #[error("empty window [{start}, {end}]")]
    EmptyWindow { start: f64, end: f64 },

    #[error("window [{start}, {end}] contains non-positive or sub-threshold errors")]
    NonPositiveErrors { start: f64, end: f64 },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Re-labels a blow-up with the trajectory that produced it.
    pub(crate) fn tag_trajectory(self, label: &str) -> Self {
        match self {
            Error::BlowUp { time, .. } => Error::BlowUp {
                trajectory: label.to_string(),
                time,
            },
            other => other,
        }
    }
}
