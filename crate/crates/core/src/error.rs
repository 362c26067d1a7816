use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: bad header {found:?}, expected {expected:?}", path.display())]
    Header {
        path: PathBuf,
        found: String,
        expected: &'static str,
    },

    #[error("{}: row {row}: {msg}", path.display())]
    MalformedRow {
        path: PathBuf,
        row: usize,
        msg: String,
    },

    #[error("{}: point count {found} ≠ {expected}", path.display())]
    PointCount {
        path: PathBuf,
        found: usize,
        expected: usize,
    },

    #[error("{}: non-uniform frequency grid at row {row}", path.display())]
    NonUniformGrid { path: PathBuf, row: usize },

    #[error("{}: frequency grid does not match band plan: {msg}", path.display())]
    GridPlanMismatch { path: PathBuf, msg: String },

    #[error("{}: {source}", path.display())]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error("invalid {field}: {msg}")]
    InvalidField { field: &'static str, msg: String },

    #[error("invalid band plan: {0}")]
    InvalidPlan(String),

    #[error("no {scenario} segments for center frequencies {centers:?} GHz")]
    MissingCenters { scenario: String, centers: Vec<f64> },

    #[error("segment file not found: {}", path.display())]
    MissingSegmentFile { path: PathBuf },

    #[error("series has no points")]
    EmptySeries,

    #[error("no segments to average")]
    NoSegments,

    #[error("segments do not share a common grid: {0}")]
    MismatchedSegments(String),

    #[error("no detectable arrival (noise floor {noise_floor_db:.2} dB)")]
    NoDetectableArrival { noise_floor_db: f64 },

    #[error("invalid gate configuration: {0}")]
    InvalidGate(String),

    #[error("at {center_ghz} GHz: {source}")]
    AtCenter {
        center_ghz: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("linear fit needs at least 2 points, got {0}")]
    TooFewPoints(usize),

    #[error("linear fit is singular: all frequencies identical")]
    SingularFit,

    #[error("comparison grid is empty")]
    EmptyGrid,

    #[error("grid point {0} GHz is not a frequency of the series")]
    GridNotInSeries(f64),

    #[error("unknown catalog model {0:?}")]
    UnknownModel(String),

    #[error("invalid synthesis config: {0}")]
    InvalidSynth(String),

    #[error("{stage} stage failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn at_center(self, center_ghz: f64) -> Self {
        Error::AtCenter {
            center_ghz,
            source: Box::new(self),
        }
    }

    pub(crate) fn in_stage(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }
}
