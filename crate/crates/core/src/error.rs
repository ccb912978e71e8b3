use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed CSV: {0}")]
    Csv(String),

    #[error("column `{0}` not found")]
    MissingColumn(String),

    #[error("column `{0}` selected more than once")]
    DuplicateColumn(String),

    #[error("row {row}, column `{column}`: cannot parse `{value}` as a finite number")]
    ParseCell { row: usize, column: String, value: String },

    #[error("column `{0}` has zero variance and cannot be standardized")]
    ZeroVariance(String),

    #[error("eps must be a positive finite number, got {0}")]
    InvalidEps(f64),

    #[error("point cloud is empty")]
    EmptyCloud,

    #[error("{what} has length {got}, expected {expected}")]
    LengthMismatch { what: String, expected: usize, got: usize },

    #[error("coloring `{0}` is already registered")]
    DuplicateColoring(String),

    #[error("unknown coloring `{name}` (available: {})", available.join(", "))]
    UnknownColoring { name: String, available: Vec<String> },

    #[error("no position for ball {0}")]
    MissingPosition(usize),

    #[error("graph has no nodes")]
    EmptyGraph,

    #[error("invalid colormap: {0}")]
    InvalidColorMap(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid graph document: {0}")]
    InvalidDocument(String),

    #[error("unknown ball {0}")]
    UnknownBall(usize),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for failures of the environment (files) rather than of the input.
    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io { .. })
    }
}
