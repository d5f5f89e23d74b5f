//! Exact input sensitivities, normalized importances and a readable form of
//! the fitted expansion.
//!
//! With `u = (x - c) / s` and `theta = arccos(tanh u)`, the composite
//! derivative is `d theta / dx = -sech(u) / s`; it stays bounded where tanh
//! saturates, unlike the factored `arccos' * tanh'` form.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::features::ROW_CHUNK;
use crate::matrix::Matrix;
use crate::model::SpectralModel;
use crate::preprocessing::check_finite;

#[derive(Debug, Clone, PartialEq)]
pub struct SensitivityReport {
    /// N×D matrix of `d yhat / d x_j` in target units per raw feature unit.
    pub per_sample: Matrix,
    /// Mean absolute sensitivity per feature, normalized to sum to one.
    pub importance: Vec<f64>,
    /// Set when every sensitivity is zero and `importance` is uniform.
    pub degenerate: bool,
}

fn sech(u: f64) -> f64 {
    // cosh overflows to inf for |u| > ~710, giving exactly 0
    1.0 / u.cosh()
}

/// Closed-form gradient of the prediction with respect to each raw input.
pub fn sensitivity(model: &SpectralModel, x: &Matrix) -> Result<Matrix> {
    let d = model.dim();
    if d == 0 {
        return Err(Error::State("model has no input features".into()));
    }
    if x.cols() != d {
        return Err(Error::Config(format!(
            "model expects {d} features, data has {}",
            x.cols()
        )));
    }
    check_finite(x)?;
    let sc = &model.scaling;
    let mut out = Matrix::zeros(x.rows(), d);
    out.as_mut_slice()
        .par_chunks_mut(ROW_CHUNK * d)
        .enumerate()
        .for_each(|(c, chunk)| {
            let mut theta = vec![0.0; d];
            for (r, grad) in chunk.chunks_mut(d).enumerate() {
                let row = x.row(c * ROW_CHUNK + r);
                for (j, t) in theta.iter_mut().enumerate() {
                    *t = sc.angle(j, row[j]);
                }
                // grad_j accumulates sum_q A_q m_qj sin(m_q . theta)
                for (m, a) in model.paths.iter().zip(&model.amplitudes) {
                    let w = a * m.phase(&theta).sin();
                    for (&j, &mj) in m.support().iter().zip(m.coeffs()) {
                        grad[j] += w * mj as f64;
                    }
                }
                for (j, g) in grad.iter_mut().enumerate() {
                    *g *= sech(sc.standardize(j, row[j])) / sc.scales[j];
                }
            }
        });
    Ok(out)
}

/// Normalized mean absolute sensitivities; uniform with `degenerate = true`
/// when the model does not depend on any input.
pub fn importance(model: &SpectralModel, x: &Matrix) -> Result<SensitivityReport> {
    if x.rows() == 0 {
        return Err(Error::Config("importance needs at least one sample".into()));
    }
    let per_sample = sensitivity(model, x)?;
    let d = per_sample.cols();
    let mut mean_abs = vec![0.0; d];
    for row in per_sample.row_iter() {
        for (m, g) in mean_abs.iter_mut().zip(row) {
            *m += g.abs();
        }
    }
    let total: f64 = mean_abs.iter().sum();
    let (importance, degenerate) = if total > 0.0 && total.is_finite() {
        (mean_abs.iter().map(|m| m / total).collect(), false)
    } else {
        (vec![1.0 / d as f64; d], true)
    };
    Ok(SensitivityReport {
        per_sample,
        importance,
        degenerate,
    })
}

fn theta_symbol(name: &str) -> String {
    format!("θ_{name}")
}

/// Renders `intercept ± |A|·cos(...)` with the `top_n` largest terms, followed
/// by the angle definitions of the features that appear.
pub fn render_expression(model: &SpectralModel, top_n: usize, feature_names: Option<&[String]>) -> String {
    let d = model.dim();
    let name = |j: usize| match feature_names {
        Some(n) if n.len() == d => n[j].clone(),
        _ => model.feature_name(j),
    };
    let mut out = format!("{:.2}", model.intercept + model.scaling.target_mean);

    let mut order: Vec<usize> = (0..model.num_paths()).collect();
    // stable sort keeps path order among equal magnitudes
    order.sort_by(|&a, &b| model.amplitudes[b].abs().total_cmp(&model.amplitudes[a].abs()));
    order.truncate(top_n);

    let mut used = vec![false; d];
    for &q in &order {
        let a = model.amplitudes[q];
        let m = &model.paths[q];
        let sign = if a < 0.0 { '−' } else { '+' };
        let mut arg = String::new();
        for (i, (&j, &c)) in m.support().iter().zip(m.coeffs()).enumerate() {
            used[j] = true;
            if i > 0 {
                arg.push_str(if c < 0 { " − " } else { " + " });
            } else if c < 0 {
                arg.push('−');
            }
            if c.abs() != 1 {
                write!(arg, "{}", c.abs()).unwrap();
            }
            arg.push_str(&theta_symbol(&name(j)));
        }
        write!(out, " {sign} {:.2}·cos({arg})", a.abs()).unwrap();
    }

    if !order.is_empty() {
        out.push_str("\nwhere");
        for j in (0..d).filter(|&j| used[j]) {
            write!(
                out,
                "\n  {} = arccos(tanh(({} − {:.4}) / {:.4}))",
                theta_symbol(&name(j)),
                name(j),
                model.scaling.centers[j],
                model.scaling.scales[j]
            )
            .unwrap();
        }
    }
    out
}
