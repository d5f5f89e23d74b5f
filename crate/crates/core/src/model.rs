//! Fitted spectral-path model: dictionary, amplitudes, scaling and trace.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features;
use crate::matrix::Matrix;
use crate::paths::FrequencyVector;
use crate::preprocessing::{transform_to_angles, ScalingParams};

/// One greedy iteration as recorded in the fit trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub iteration: usize,
    pub accepted: bool,
    /// Support size of the best block this iteration (0 when none was scored).
    pub k: usize,
    pub block_size: usize,
    pub paths_added: usize,
    pub n_paths: usize,
    pub train_r2: f64,
    pub val_r2: f64,
    pub lambda: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralModel {
    pub paths: Vec<FrequencyVector>,
    pub amplitudes: Vec<f64>,
    /// `c0`, in centered target units.
    pub intercept: f64,
    pub scaling: ScalingParams,
    pub lambda_star: f64,
    pub fit_trace: Vec<TraceRecord>,
    pub feature_names: Option<Vec<String>>,
    pub target_name: Option<String>,
}

impl SpectralModel {
    pub fn new(
        paths: Vec<FrequencyVector>,
        amplitudes: Vec<f64>,
        intercept: f64,
        scaling: ScalingParams,
        lambda_star: f64,
    ) -> Result<Self> {
        let model = SpectralModel {
            paths,
            amplitudes,
            intercept,
            scaling,
            lambda_star,
            fit_trace: Vec::new(),
            feature_names: None,
            target_name: None,
        };
        model.validate()?;
        Ok(model)
    }

    /// Checks the structural invariants; used on construction and on load.
    pub fn validate(&self) -> Result<()> {
        let d = self.scaling.dim();
        if self.paths.len() != self.amplitudes.len() {
            return Err(Error::Schema(format!(
                "{} paths but {} amplitudes",
                self.paths.len(),
                self.amplitudes.len()
            )));
        }
        let mut seen = std::collections::HashSet::new();
        for m in &self.paths {
            if m.dim() != d {
                return Err(Error::Schema(format!(
                    "path {m} has dimension {} but the model has {d} features",
                    m.dim()
                )));
            }
            if !m.is_canonical() {
                return Err(Error::Schema(format!("path {m} is not canonical")));
            }
            if !seen.insert(m) {
                return Err(Error::Schema(format!("path {m} appears twice")));
            }
        }
        if !self.intercept.is_finite() || self.amplitudes.iter().any(|a| !a.is_finite()) {
            return Err(Error::Schema("non-finite coefficient".into()));
        }
        if !(self.lambda_star >= 0.0 && self.lambda_star.is_finite()) {
            return Err(Error::Schema(format!("invalid lambda_star {}", self.lambda_star)));
        }
        if let Some(names) = &self.feature_names {
            if names.len() != d {
                return Err(Error::Schema(format!(
                    "{} feature names for {d} features",
                    names.len()
                )));
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.scaling.dim()
    }

    pub fn num_paths(&self) -> usize {
        self.paths.len()
    }

    /// Predictions in raw target units from raw feature rows.
    pub fn predict_raw(&self, x: &Matrix) -> Result<Vec<f64>> {
        let theta = transform_to_angles(x, &self.scaling)?;
        features::predict(self, &theta)
    }

    /// Name of feature `j`, falling back to `x{j}`.
    pub fn feature_name(&self, j: usize) -> String {
        self.feature_names
            .as_ref()
            .map_or_else(|| format!("x{j}"), |n| n[j].clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scaling(d: usize) -> ScalingParams {
        ScalingParams::new(vec![0.0; d], vec![1.0; d], 0.0).unwrap()
    }

    #[test]
    fn rejects_broken_dictionaries() {
        let fv = FrequencyVector::from_dense;
        assert!(SpectralModel::new(vec![fv(&[1, 0])], vec![], 0.0, scaling(2), 0.1).is_err());
        assert!(SpectralModel::new(vec![fv(&[-1, 1])], vec![1.0], 0.0, scaling(2), 0.1).is_err());
        assert!(SpectralModel::new(vec![fv(&[1, 0, 0])], vec![1.0], 0.0, scaling(2), 0.1).is_err());
        assert!(SpectralModel::new(
            vec![fv(&[1, 1]), fv(&[1, 1])],
            vec![1.0, 2.0],
            0.0,
            scaling(2),
            0.1
        )
        .is_err());
        assert!(SpectralModel::new(vec![fv(&[1, 1])], vec![f64::NAN], 0.0, scaling(2), 0.1).is_err());
    }

    #[test]
    fn raw_prediction_goes_through_the_scaler() {
        let m = SpectralModel::new(
            vec![FrequencyVector::from_dense(&[1])],
            vec![2.0],
            0.5,
            ScalingParams::new(vec![3.0], vec![1.0], 10.0).unwrap(),
            0.0,
        )
        .unwrap();
        // x = c gives theta = pi/2, cos = 0
        let p = m.predict_raw(&Matrix::from_rows(&[[3.0]]).unwrap()).unwrap();
        assert!((p[0] - 10.5).abs() < 1e-15);
        assert_eq!(m.feature_name(0), "x0");
    }
}
