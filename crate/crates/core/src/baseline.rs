//! Plain ridge regression on robustly standardized inputs, as a reference
//! point for the spectral model.

use crate::data_io::metrics;
use crate::error::{Error, Result};
use crate::greedy::select_lambda;
use crate::matrix::Matrix;
use crate::preprocessing::{center_target, check_finite, fit_scaler, ScalingParams};
use crate::solver::ridge_solve;

#[derive(Debug, Clone, PartialEq)]
pub struct RidgeBaseline {
    /// Centers and scales of `z = (x - c) / s`; no tanh is applied.
    pub scaling: ScalingParams,
    pub intercept: f64,
    pub weights: Vec<f64>,
    pub lambda: f64,
}

fn standardized(x: &Matrix, s: &ScalingParams) -> Result<Matrix> {
    if x.cols() != s.dim() {
        return Err(Error::Config(format!(
            "model expects {} features, data has {}",
            s.dim(),
            x.cols()
        )));
    }
    check_finite(x)?;
    let mut z = x.clone();
    for j in 0..x.cols() {
        z.map_column(j, |v| s.standardize(j, v));
    }
    Ok(z)
}

impl RidgeBaseline {
    pub fn predict(&self, x: &Matrix) -> Result<Vec<f64>> {
        let z = standardized(x, &self.scaling)?;
        Ok(z.row_iter()
            .map(|r| {
                self.scaling.target_mean
                    + self.intercept
                    + r.iter().zip(&self.weights).map(|(a, b)| a * b).sum::<f64>()
            })
            .collect())
    }
}

/// Fits at every penalty in `lambda_grid` and keeps the validation-best one
/// (ties to the larger penalty).
pub fn fit_ridge_baseline(
    x_train: &Matrix,
    y_train: &[f64],
    x_val: &Matrix,
    y_val: &[f64],
    lambda_grid: &[f64],
) -> Result<RidgeBaseline> {
    if lambda_grid.is_empty() {
        return Err(Error::Config("lambda grid is empty".into()));
    }
    if x_train.rows() != y_train.len() {
        return Err(Error::Config("feature and target row counts differ".into()));
    }
    let mut scaling = fit_scaler(x_train)?;
    let (yc, mean) = center_target(y_train)?;
    scaling.target_mean = mean;
    let z = standardized(x_train, &scaling)?;
    let p = z.cols() + 1;
    let mut g = Matrix::zeros(p, p);
    let mut b = vec![0.0; p];
    let mut phi = vec![1.0; p];
    for (row, y) in z.row_iter().zip(&yc) {
        phi[1..].copy_from_slice(row);
        for i in 0..p {
            b[i] += phi[i] * y;
            for j in 0..p {
                g[(i, j)] += phi[i] * phi[j];
            }
        }
    }
    let mut fits = Vec::with_capacity(lambda_grid.len());
    for &l in lambda_grid {
        let sol = ridge_solve(&g, &b, l)?;
        let model = RidgeBaseline {
            scaling: scaling.clone(),
            intercept: sol.beta[0],
            weights: sol.beta[1..].to_vec(),
            lambda: l,
        };
        let score = metrics::r2(y_val, &model.predict(x_val)?)?;
        fits.push((score, model));
    }
    let pairs: Vec<(f64, f64)> = fits.iter().map(|(s, m)| (m.lambda, *s)).collect();
    let best = select_lambda(&pairs).expect("grid is non-empty");
    Ok(fits
        .into_iter()
        .find(|(_, m)| m.lambda == best)
        .expect("selected from grid")
        .1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_a_linear_function() {
        let rows: Vec<[f64; 2]> = (0..50).map(|i| [i as f64, ((i * 7) % 11) as f64]).collect();
        let x = Matrix::from_rows(&rows).unwrap();
        let y: Vec<f64> = rows.iter().map(|r| 3.0 * r[0] - 2.0 * r[1] + 5.0).collect();
        let m = fit_ridge_baseline(&x, &y, &x, &y, &[1e-8, 1e-6]).unwrap();
        let pred = m.predict(&x).unwrap();
        for (p, t) in pred.iter().zip(&y) {
            assert!((p - t).abs() < 1e-5, "{p} vs {t}");
        }
        assert!(m.predict(&Matrix::zeros(1, 3)).is_err());
    }
}
