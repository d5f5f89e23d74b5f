//! Split, fit and score a dataset end to end.

use std::time::Instant;

use crate::data_io::{metrics, split, Dataset, SplitIndices};
use crate::error::{Error, Result};
use crate::greedy::{fit, FitConfig};
use crate::matrix::Matrix;
use crate::model::SpectralModel;

/// Raw features and targets of the three splits.
#[derive(Debug, Clone)]
pub struct SplitData {
    pub indices: SplitIndices,
    pub x_train: Matrix,
    pub y_train: Vec<f64>,
    pub x_val: Matrix,
    pub y_val: Vec<f64>,
    pub x_test: Matrix,
    pub y_test: Vec<f64>,
}

impl SplitData {
    pub fn new(dataset: &Dataset, seed: u64) -> Result<Self> {
        let indices = split(dataset.len(), seed)?;
        let part = |idx: &[usize]| {
            (
                dataset.features.select_rows(idx),
                idx.iter().map(|&i| dataset.target[i]).collect::<Vec<_>>(),
            )
        };
        let (x_train, y_train) = part(&indices.train);
        let (x_val, y_val) = part(&indices.val);
        let (x_test, y_test) = part(&indices.test);
        Ok(SplitData {
            indices,
            x_train,
            y_train,
            x_val,
            y_val,
            x_test,
            y_test,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scores {
    pub r2: f64,
    pub nrmse: f64,
}

impl Scores {
    pub fn of(y: &[f64], pred: &[f64]) -> Result<Self> {
        Ok(Scores {
            r2: metrics::r2(y, pred)?,
            nrmse: metrics::nrmse_sigma(y, pred)?,
        })
    }

    /// Like [`Scores::of`], but a split with a constant target scores NaN.
    pub fn or_nan(y: &[f64], pred: &[f64]) -> Result<Self> {
        match Self::of(y, pred) {
            Err(Error::UndefinedMetric(_)) => Ok(Scores {
                r2: f64::NAN,
                nrmse: f64::NAN,
            }),
            other => other,
        }
    }
}

#[derive(Debug, Clone)]
pub struct FitOutcome {
    pub model: SpectralModel,
    pub data: SplitData,
    pub train: Scores,
    pub val: Scores,
    pub test: Scores,
    /// Wall time of scaling plus greedy selection.
    pub seconds: f64,
}

/// Splits with `config.seed`, fits on train/validation and scores all splits.
pub fn fit_dataset(dataset: &Dataset, config: &FitConfig) -> Result<FitOutcome> {
    let data = SplitData::new(dataset, config.seed)?;
    let start = Instant::now();
    let mut model = fit(&data.x_train, &data.y_train, &data.x_val, &data.y_val, config)?;
    let seconds = start.elapsed().as_secs_f64();
    if !dataset.feature_names.is_empty() {
        model.feature_names = Some(dataset.feature_names.clone());
    }
    if !dataset.target_name.is_empty() {
        model.target_name = Some(dataset.target_name.clone());
    }
    let score = |x: &Matrix, y: &[f64]| Scores::or_nan(y, &model.predict_raw(x)?);
    let train = score(&data.x_train, &data.y_train)?;
    let val = score(&data.x_val, &data.y_val)?;
    let test = score(&data.x_test, &data.y_test)?;
    Ok(FitOutcome {
        model,
        data,
        train,
        val,
        test,
        seconds,
    })
}
