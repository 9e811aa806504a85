use std::path::PathBuf;

/// Everything that can go wrong inside the numerical pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("argument {value} outside the domain of {function}")]
    Domain { function: &'static str, value: f64 },

    #[error("order {requested} exceeds the table maximum {max}")]
    Order { requested: usize, max: usize },

    #[error("kernel evaluated at coincident points (distance {distance:e})")]
    Singularity { distance: f64 },

    #[error("degenerate curve: {0}")]
    DegenerateCurve(String),

    #[error("invalid geometry: {0}")]
    Geometry(String),

    #[error("curve is not starlike with respect to the origin: {0}")]
    NotStarlike(String),

    #[error("length mismatch: expected {expected}, got {got}")]
    Shape { expected: usize, got: usize },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("non-finite data: {0}")]
    NonFinite(String),

    #[error("point {point:?} is not strictly inside the annulus")]
    EvaluationDomain { point: [f64; 2] },

    #[error("singular system: {0}")]
    Singular(String),

    #[error("reconstruction failed at iteration {iteration}: {reason}")]
    Reconstruction { iteration: usize, reason: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
