//! Constant predictor emitting the mean training-set label.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NaiveBaseline {
    pub mean_label: f64,
}

impl NaiveBaseline {
    pub fn fit(labels: &[f64]) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::InvalidInput(
                "naive baseline needs at least one label".into(),
            ));
        }
        Ok(NaiveBaseline {
            mean_label: labels.iter().sum::<f64>() / labels.len() as f64,
        })
    }

    pub fn predict(&self) -> f64 {
        self.mean_label
    }
}
