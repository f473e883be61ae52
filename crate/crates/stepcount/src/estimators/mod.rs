//! Step-count predictors: naive mean baseline, classical peak picking, and
//! the trainable convolutional regressor.

pub mod cnn;
pub mod naive;
pub mod peakpick;
pub mod train;

pub use cnn::{CnnRegressor, ARCH_ID};
pub use naive::NaiveBaseline;
pub use peakpick::PeakPickEstimator;
pub use train::{evaluate_mse, train, EpochStats, TrainConfig, TrainOutcome};

use serde::{Deserialize, Serialize};

/// Which estimator an experiment runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorKind {
    Naive,
    Peakpick,
    Cnn,
}

impl std::fmt::Display for EstimatorKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            EstimatorKind::Naive => write!(f, "naive"),
            EstimatorKind::Peakpick => write!(f, "peakpick"),
            EstimatorKind::Cnn => write!(f, "cnn"),
        }
    }
}

impl std::str::FromStr for EstimatorKind {
    type Err = crate::error::Error;
    fn from_str(s: &str) -> crate::error::Result<Self> {
        match s {
            "naive" => Ok(EstimatorKind::Naive),
            "peakpick" => Ok(EstimatorKind::Peakpick),
            "cnn" => Ok(EstimatorKind::Cnn),
            other => Err(crate::error::Error::Config(format!(
                "unknown estimator '{other}'"
            ))),
        }
    }
}
