//! Robust tanh scaling into angular coordinates and target centering.
//!
//! Every raw feature is mapped as `theta = arccos(tanh((x - c) / s))` with `c`
//! the training median and `s` the normal-consistent IQR. Parameters are always
//! estimated on the training split only and reused for every other split.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// IQR of a standard normal distribution.
pub const NORMAL_IQR: f64 = 1.349;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingParams {
    pub centers: Vec<f64>,
    pub scales: Vec<f64>,
    pub target_mean: f64,
}

impl ScalingParams {
    pub fn new(centers: Vec<f64>, scales: Vec<f64>, target_mean: f64) -> Result<Self> {
        if centers.len() != scales.len() {
            return Err(Error::Config(format!(
                "{} centers but {} scales",
                centers.len(),
                scales.len()
            )));
        }
        if let Some(j) = scales.iter().position(|s| !(s.is_finite() && *s > 0.0)) {
            return Err(Error::Config(format!(
                "scale of feature {j} must be finite and positive, got {}",
                scales[j]
            )));
        }
        if let Some(j) = centers.iter().position(|c| !c.is_finite()) {
            return Err(Error::Config(format!("center of feature {j} is not finite")));
        }
        if !target_mean.is_finite() {
            return Err(Error::Config("target mean is not finite".into()));
        }
        Ok(ScalingParams {
            centers,
            scales,
            target_mean,
        })
    }

    pub fn dim(&self) -> usize {
        self.centers.len()
    }

    /// Standardized argument `(x - c_j) / s_j` fed to tanh.
    #[inline]
    pub fn standardize(&self, j: usize, x: f64) -> f64 {
        (x - self.centers[j]) / self.scales[j]
    }

    /// Angle of a single raw value of feature `j`.
    #[inline]
    pub fn angle(&self, j: usize, x: f64) -> f64 {
        self.standardize(j, x).tanh().clamp(-1.0, 1.0).acos()
    }
}

/// N×D matrix of angles in `[0, pi]`.
#[derive(Debug, Clone, PartialEq)]
pub struct AngularMatrix(Matrix);

impl AngularMatrix {
    /// Wraps a matrix of angles, checking the `[0, pi]` range.
    pub fn new(values: Matrix) -> Result<Self> {
        for (i, row) in values.row_iter().enumerate() {
            if let Some(j) = row
                .iter()
                .position(|t| !(0.0..=std::f64::consts::PI).contains(t))
            {
                return Err(Error::Data(format!(
                    "angle at row {i}, column {j} is {} (outside [0, pi])",
                    row[j]
                )));
            }
        }
        Ok(AngularMatrix(values))
    }

    pub fn rows(&self) -> usize {
        self.0.rows()
    }

    pub fn cols(&self) -> usize {
        self.0.cols()
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        self.0.row(i)
    }

    pub fn values(&self) -> &Matrix {
        &self.0
    }

    pub fn select_rows(&self, idx: &[usize]) -> AngularMatrix {
        AngularMatrix(self.0.select_rows(idx))
    }
}

/// Linear-interpolation quantile (Hyndman–Fan type 7) of sorted data.
pub fn quantile_type7(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of empty data");
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub(crate) fn check_finite(x: &Matrix) -> Result<()> {
    for (i, row) in x.row_iter().enumerate() {
        if let Some(j) = row.iter().position(|v| !v.is_finite()) {
            return Err(Error::Data(format!(
                "non-finite value {} at row {i}, column {j}",
                row[j]
            )));
        }
    }
    Ok(())
}

/// Estimates per-feature median centers and IQR/1.349 scales.
///
/// Columns with zero IQR fall back to a unit scale. `target_mean` is left at
/// zero; it is filled in from [`center_target`].
pub fn fit_scaler(x_train: &Matrix) -> Result<ScalingParams> {
    if x_train.is_empty() {
        return Err(Error::Config("cannot fit scaler on an empty matrix".into()));
    }
    if x_train.rows() < 2 {
        return Err(Error::Config(format!(
            "scaler needs at least 2 rows, got {}",
            x_train.rows()
        )));
    }
    check_finite(x_train)?;

    let (centers, scales) = (0..x_train.cols())
        .map(|j| {
            let mut col = x_train.column(j);
            col.sort_by(f64::total_cmp);
            let center = quantile_type7(&col, 0.5);
            let iqr = quantile_type7(&col, 0.75) - quantile_type7(&col, 0.25);
            let scale = iqr / NORMAL_IQR;
            (center, if scale > 0.0 { scale } else { 1.0 })
        })
        .unzip();

    Ok(ScalingParams {
        centers,
        scales,
        target_mean: 0.0,
    })
}

pub fn transform_to_angles(x: &Matrix, params: &ScalingParams) -> Result<AngularMatrix> {
    if x.cols() != params.dim() {
        return Err(Error::Config(format!(
            "data has {} features but scaler was fitted on {}",
            x.cols(),
            params.dim()
        )));
    }
    check_finite(x)?;
    let mut out = x.clone();
    for j in 0..x.cols() {
        out.map_column(j, |v| params.angle(j, v));
    }
    Ok(AngularMatrix(out))
}

/// Subtracts the mean; returns the centered targets and the mean.
pub fn center_target(y: &[f64]) -> Result<(Vec<f64>, f64)> {
    if y.is_empty() {
        return Err(Error::Config("cannot center an empty target".into()));
    }
    if let Some(i) = y.iter().position(|v| !v.is_finite()) {
        return Err(Error::Data(format!("non-finite target {} at row {i}", y[i])));
    }
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    Ok((y.iter().map(|v| v - mean).collect(), mean))
}

pub fn decenter(y_centered: &[f64], mean: f64) -> Vec<f64> {
    y_centered.iter().map(|v| v + mean).collect()
}
