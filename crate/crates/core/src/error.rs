use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Coarse failure class, used by the CLI to pick an exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Config,
    Data,
    Stage,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot access {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed document {path}: {message}")]
    Malformed { path: PathBuf, message: String },

    #[error("feature {feature}: missing attribute {attribute:?}")]
    MissingAttribute { feature: String, attribute: String },

    #[error("feature {feature}: unsupported geometry {kind:?} (only Polygon and MultiPolygon)")]
    UnsupportedGeometry { feature: String, kind: String },

    #[error("feature {feature}: invalid land-use code {code:?}")]
    InvalidCode { feature: String, code: String },

    #[error("feature {feature}: degenerate ring (fewer than 3 distinct vertices)")]
    DegenerateRing { feature: String },

    #[error("unknown feature id {0:?}")]
    UnknownFeature(String),

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("item universe has {items} items, oracle limit is {limit}")]
    UniverseTooLarge { items: usize, limit: usize },

    #[error("city {city}: duplicate frequent itemset {key:?}")]
    DuplicateItemset { city: String, key: String },

    #[error("bandwidth search did not converge for point {point}")]
    BandwidthNotConverged { point: usize },

    #[error("label mismatch: {0}")]
    LabelMismatch(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("missing prerequisite file {0}")]
    MissingPrerequisite(PathBuf),

    #[error("stage {stage}{}: {source}", city.as_ref().map(|c| format!(" (city {c})")).unwrap_or_default())]
    Stage {
        stage: &'static str,
        city: Option<String>,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn malformed(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Error::Malformed {
            path: path.into(),
            message: message.into(),
        }
    }

    pub fn in_stage(self, stage: &'static str, city: Option<&str>) -> Self {
        Error::Stage {
            stage,
            city: city.map(str::to_owned),
            source: Box::new(self),
        }
    }

    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Config(_) | Error::InvalidParameter(_) => ErrorKind::Config,
            Error::Stage { .. } | Error::BandwidthNotConverged { .. } => ErrorKind::Stage,
            _ => ErrorKind::Data,
        }
    }
}
