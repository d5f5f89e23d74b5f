//! Directional cosine design matrix `Phi = cos(Theta M^T)`.
//!
//! Phases are accumulated sparsely over each path's support. Rows are
//! independent, so large inputs are evaluated in row chunks in parallel.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::model::SpectralModel;
use crate::paths::FrequencyVector;
use crate::preprocessing::AngularMatrix;

/// Row chunk used by every streaming pass over samples.
pub(crate) const ROW_CHUNK: usize = 256;

/// N×Q block of cosine features aligned with `paths` (no intercept column).
#[derive(Debug, Clone, PartialEq)]
pub struct DesignBlock {
    values: Matrix,
    paths: Vec<FrequencyVector>,
}

impl DesignBlock {
    pub fn values(&self) -> &Matrix {
        &self.values
    }

    pub fn paths(&self) -> &[FrequencyVector] {
        &self.paths
    }

    pub fn rows(&self) -> usize {
        self.values.rows()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        self.values.row(i)
    }
}

pub(crate) fn check_dims(theta_cols: usize, paths: &[FrequencyVector]) -> Result<()> {
    if let Some(m) = paths.iter().find(|m| m.dim() != theta_cols) {
        return Err(Error::Config(format!(
            "path {m} has dimension {} but data has {theta_cols} features",
            m.dim()
        )));
    }
    Ok(())
}

/// Writes `cos(m_q . theta)` for every path into `out`.
#[inline]
pub(crate) fn fill_features(theta: &[f64], paths: &[FrequencyVector], out: &mut [f64]) {
    for (o, m) in out.iter_mut().zip(paths) {
        *o = m.phase(theta).cos();
    }
}

pub fn evaluate_block(theta: &AngularMatrix, paths: &[FrequencyVector]) -> Result<DesignBlock> {
    check_dims(theta.cols(), paths)?;
    let q = paths.len();
    let mut values = Matrix::zeros(theta.rows(), q);
    if q > 0 {
        values
            .as_mut_slice()
            .par_chunks_mut(ROW_CHUNK * q)
            .enumerate()
            .for_each(|(c, chunk)| {
                for (r, out) in chunk.chunks_mut(q).enumerate() {
                    fill_features(theta.row(c * ROW_CHUNK + r), paths, out);
                }
            });
    }
    Ok(DesignBlock {
        values,
        paths: paths.to_vec(),
    })
}

/// De-centered predictions `target_mean + c0 + sum_q A_q cos(m_q . theta)`.
pub fn predict(model: &SpectralModel, theta: &AngularMatrix) -> Result<Vec<f64>> {
    if theta.cols() != model.dim() {
        return Err(Error::Config(format!(
            "model expects {} features, data has {}",
            model.dim(),
            theta.cols()
        )));
    }
    let offset = model.intercept + model.scaling.target_mean;
    Ok((0..theta.rows())
        .into_par_iter()
        .with_min_len(ROW_CHUNK)
        .map(|i| {
            let row = theta.row(i);
            offset
                + model
                    .paths
                    .iter()
                    .zip(&model.amplitudes)
                    .map(|(m, a)| a * m.phase(row).cos())
                    .sum::<f64>()
        })
        .collect())
}
