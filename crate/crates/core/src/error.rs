use std::path::PathBuf;

use thiserror::Error;

use crate::array::Scene;
use crate::training::TrainHistory;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid scene: {0}")]
    InvalidScene(String),

    #[error("invalid layout: {0}")]
    InvalidLayout(String),

    #[error("invalid spacing ratios: {0}")]
    InvalidRatios(String),

    #[error("beamformer is not unit-norm (norm = {norm})")]
    NonUnitBeamformer { norm: f64 },

    #[error("Hermitian solve failed, condition estimate {condition_estimate:e}")]
    Solver { condition_estimate: f64 },

    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("non-finite gradient in layer {layer}")]
    NonFiniteGradient { layer: usize },

    #[error("non-finite loss {loss} for scene {scene:?}")]
    NonFiniteLoss { loss: f64, scene: Scene },

    #[error("training diverged in epoch {epoch}: {source}")]
    Diverged {
        epoch: usize,
        history: TrainHistory,
        #[source]
        source: Box<Error>,
    },

    #[error("no learning progress: final-epoch mean SINR {last_db:.3} dB < first-epoch {first_db:.3} dB")]
    NoProgress {
        first_db: f64,
        last_db: f64,
        history: TrainHistory,
    },

    #[error("infeasible geometry: {0}")]
    InfeasibleGeometry(String),

    #[error("model file: {0}")]
    ModelFormat(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("{0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn csv(path: impl Into<PathBuf>, source: csv::Error) -> Self {
        Error::Csv {
            path: path.into(),
            source,
        }
    }
}
