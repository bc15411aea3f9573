use thiserror::Error;

use crate::gridworld::JointCameraState;
use crate::sensing::Observation;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid scenario, map, camera or controller configuration.
    #[error("configuration error: {0}")]
    Config(String),

    /// Scenario file could not be parsed.
    #[error("parse error: {0}")]
    Parse(String),

    /// The observation has zero probability under the predicted belief.
    #[error("belief conflict: observation {observation} impossible under camera state {cameras}")]
    BeliefConflict {
        observation: Observation,
        cameras: JointCameraState,
    },

    /// Brute-force enumeration would exceed the size guard.
    #[error("enumeration of {size} joint observations exceeds the limit of {limit}")]
    EnumerationTooLarge { size: u128, limit: u128 },

    #[error("metric undefined: {0}")]
    UndefinedMetric(&'static str),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}
