use serde::{Deserialize, Serialize};

use super::LinearError;

/// Per-dimension affine map of the training range onto `[0, 1]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaxMinScaler {
    min: Vec<f64>,
    max: Vec<f64>,
}

impl MaxMinScaler {
    pub fn fit(features: &[Vec<f64>]) -> Result<Self, LinearError> {
        let first = features.first().ok_or(LinearError::Empty)?;
        let dim = first.len();
        let mut min = first.clone();
        let mut max = first.clone();
        for (i, row) in features.iter().enumerate().skip(1) {
            if row.len() != dim {
                return Err(LinearError::Dimension {
                    row: i,
                    expected: dim,
                    found: row.len(),
                });
            }
            for ((lo, hi), &v) in min.iter_mut().zip(max.iter_mut()).zip(row) {
                *lo = lo.min(v);
                *hi = hi.max(v);
            }
        }
        Ok(MaxMinScaler { min, max })
    }

    pub fn dim(&self) -> usize {
        self.min.len()
    }

    pub fn min(&self) -> &[f64] {
        &self.min
    }

    pub fn max(&self) -> &[f64] {
        &self.max
    }

    /// Apply the fitted map. Values outside the training range extrapolate
    /// (no clamping); constant training columns map to 0.
    pub fn transform_row(&self, row: &[f64]) -> Result<Vec<f64>, LinearError> {
        if row.len() != self.dim() {
            return Err(LinearError::Dimension {
                row: 0,
                expected: self.dim(),
                found: row.len(),
            });
        }
        Ok(row
            .iter()
            .zip(self.min.iter().zip(&self.max))
            .map(|(&v, (&lo, &hi))| if hi > lo { (v - lo) / (hi - lo) } else { 0.0 })
            .collect())
    }

    pub fn transform(&self, features: &[Vec<f64>]) -> Result<Vec<Vec<f64>>, LinearError> {
        features
            .iter()
            .enumerate()
            .map(|(i, row)| {
                self.transform_row(row).map_err(|e| match e {
                    LinearError::Dimension { expected, found, .. } => LinearError::Dimension { row: i, expected, found },
                    other => other,
                })
            })
            .collect()
    }
}

pub fn fit_scaler(features: &[Vec<f64>]) -> Result<MaxMinScaler, LinearError> {
    MaxMinScaler::fit(features)
}
