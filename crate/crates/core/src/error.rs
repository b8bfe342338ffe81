use std::path::PathBuf;

use thiserror::Error;

use crate::activity::ActivityClass;
use crate::mapping::BuildingType;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed header: {0}")]
    MalformedHeader(String),

    #[error("invalid input at {location}: {reason}")]
    InvalidInput { location: String, reason: String },

    #[error("invalid activity class label `{0}` (expected c01..c08)")]
    UnknownClass(String),

    #[error("activity code map must end with a catch-all rule (empty prefix)")]
    MissingCatchAll,

    #[error("no data: {0}")]
    NoData(String),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("time step {step} has zero total occurrence")]
    ZeroOccurrence { step: usize },

    #[error("all sequence weights are zero")]
    ZeroWeights,

    #[error("class {class} is placed on {btype} but no {btype} building has positive allocation weight")]
    NoPlacementTarget { class: ActivityClass, btype: BuildingType },

    #[error("invalid placement table: {0}")]
    InvalidPlacement(String),

    #[error("missing demographic variable `{variable}` in zone `{zone}`")]
    MissingVariable { variable: String, zone: String },

    #[error("invalid weights: {0}")]
    InvalidWeights(String),

    #[error("grid mismatch: {left} vs {right}")]
    GridMismatch { left: String, right: String },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid layer: {0}")]
    InvalidLayer(String),

    #[error("unknown color ramp `{requested}`; available: {}", available.join(", "))]
    UnknownRamp { requested: String, available: Vec<String> },

    #[error("time step {0} is not available")]
    MissingStep(usize),

    #[error("stage `{stage}` requires output of `{requires}`; run `{requires}` first ({detail})")]
    MissingStage {
        stage: &'static str,
        requires: &'static str,
        detail: String,
    },

    #[error("config error: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error("png encoding failed: {0}")]
    Png(#[from] png::EncodingError),
}

impl Error {
    pub(crate) fn invalid(location: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidInput {
            location: location.into(),
            reason: reason.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
