//! Capacity-curve, penalty-sweep and seed-sweep reports.
//!
//! Every function returns plain rows; the CLI decides how to print them.

use serde::Serialize;

use crate::data_io::Dataset;
use crate::error::Result;
use crate::greedy::FitConfig;
use crate::model::SpectralModel;
use crate::pipeline::{fit_dataset, Scores, SplitData};
use crate::preprocessing::{center_target, transform_to_angles};
use crate::solver::GramSystem;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CapacityPoint {
    pub n_paths: usize,
    pub train_r2: f64,
    pub val_r2: f64,
    pub val_nrmse: f64,
    pub test_r2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LambdaPoint {
    pub lambda: f64,
    pub train_r2: f64,
    pub val_r2: f64,
    pub test_r2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeedPoint {
    pub seed: u64,
    pub n_paths: usize,
    pub train_r2: f64,
    pub val_r2: f64,
    pub test_r2: f64,
    pub seconds: f64,
    pub error: Option<String>,
}

/// Training Gram system of the full dictionary, for re-solving prefixes and
/// penalties without another greedy run.
fn training_system(model: &SpectralModel, data: &SplitData) -> Result<GramSystem> {
    let theta = transform_to_angles(&data.x_train, &model.scaling)?;
    let (yc, _) = center_target(&data.y_train)?;
    GramSystem::from_data(&theta, &yc, model.paths.clone())
}

/// Model using the first `q` paths re-solved at `lambda`.
fn resolved(model: &SpectralModel, system: &GramSystem, q: usize, lambda: f64) -> Result<SpectralModel> {
    let sol = system.leading(q).solve_ridge(lambda)?;
    let mut m = SpectralModel::new(
        model.paths[..q].to_vec(),
        sol.amplitudes().to_vec(),
        sol.intercept(),
        model.scaling.clone(),
        lambda,
    )?;
    m.feature_names = model.feature_names.clone();
    m.target_name = model.target_name.clone();
    Ok(m)
}

fn scores(m: &SpectralModel, data: &SplitData) -> Result<(Scores, Scores, Scores)> {
    Ok((
        Scores::of(&data.y_train, &m.predict_raw(&data.x_train)?)?,
        Scores::of(&data.y_val, &m.predict_raw(&data.x_val)?)?,
        Scores::of(&data.y_test, &m.predict_raw(&data.x_test)?)?,
    ))
}

/// Scores of the leading `q` paths for every requested `q`, at `lambda_star`.
pub fn prefix_scores(model: &SpectralModel, data: &SplitData, sizes: &[usize]) -> Result<Vec<CapacityPoint>> {
    let system = training_system(model, data)?;
    sizes
        .iter()
        .map(|&q| {
            let q = q.min(model.num_paths());
            let m = resolved(model, &system, q, model.lambda_star)?;
            let (tr, va, te) = scores(&m, data)?;
            Ok(CapacityPoint {
                n_paths: q,
                train_r2: tr.r2,
                val_r2: va.r2,
                val_nrmse: va.nrmse,
                test_r2: te.r2,
            })
        })
        .collect()
}

/// One point per accepted block (plus the intercept-only start).
pub fn capacity_curve(model: &SpectralModel, data: &SplitData) -> Result<Vec<CapacityPoint>> {
    let mut sizes = vec![0];
    sizes.extend(model.fit_trace.iter().filter(|t| t.accepted).map(|t| t.n_paths));
    if sizes.last() != Some(&model.num_paths()) {
        sizes.push(model.num_paths());
    }
    prefix_scores(model, data, &sizes)
}

/// Re-solves the fixed dictionary at every penalty.
pub fn lambda_sweep(model: &SpectralModel, data: &SplitData, grid: &[f64]) -> Result<Vec<LambdaPoint>> {
    let system = training_system(model, data)?;
    grid.iter()
        .map(|&lambda| {
            let m = resolved(model, &system, model.num_paths(), lambda)?;
            let (tr, va, te) = scores(&m, data)?;
            Ok(LambdaPoint {
                lambda,
                train_r2: tr.r2,
                val_r2: va.r2,
                test_r2: te.r2,
            })
        })
        .collect()
}

/// Full refits over several split seeds; failures are recorded, not raised.
pub fn seed_sweep(dataset: &Dataset, config: &FitConfig, seeds: &[u64]) -> Vec<SeedPoint> {
    seeds
        .iter()
        .map(|&seed| {
            let cfg = FitConfig {
                seed,
                ..config.clone()
            };
            match fit_dataset(dataset, &cfg) {
                Ok(o) => SeedPoint {
                    seed,
                    n_paths: o.model.num_paths(),
                    train_r2: o.train.r2,
                    val_r2: o.val.r2,
                    test_r2: o.test.r2,
                    seconds: o.seconds,
                    error: None,
                },
                Err(e) => SeedPoint {
                    seed,
                    n_paths: 0,
                    train_r2: f64::NAN,
                    val_r2: f64::NAN,
                    test_r2: f64::NAN,
                    seconds: 0.0,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect()
}
