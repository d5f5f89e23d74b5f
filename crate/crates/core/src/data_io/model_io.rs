//! Versioned JSON serialization of fitted models.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{SpectralModel, TraceRecord};
use crate::paths::PathRecord;
use crate::preprocessing::ScalingParams;

pub const FORMAT_VERSION: u64 = 1;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFile {
    format_version: u64,
    d: usize,
    centers: Vec<f64>,
    scales: Vec<f64>,
    target_mean: f64,
    lambda_star: f64,
    intercept: f64,
    paths: Vec<PathRecord>,
    amplitudes: Vec<f64>,
    fit_trace: Vec<TraceRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    feature_names: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    target_name: Option<String>,
}

#[derive(Deserialize)]
struct VersionProbe {
    format_version: u64,
}

pub fn to_json(model: &SpectralModel) -> Result<String> {
    model.validate()?;
    let file = ModelFile {
        format_version: FORMAT_VERSION,
        d: model.dim(),
        centers: model.scaling.centers.clone(),
        scales: model.scaling.scales.clone(),
        target_mean: model.scaling.target_mean,
        lambda_star: model.lambda_star,
        intercept: model.intercept,
        paths: model.paths.iter().map(PathRecord::from).collect(),
        amplitudes: model.amplitudes.clone(),
        fit_trace: model.fit_trace.clone(),
        feature_names: model.feature_names.clone(),
        target_name: model.target_name.clone(),
    };
    // serde_json prints f64 with shortest round-trip digits
    let mut s = serde_json::to_string_pretty(&file)
        .map_err(|e| Error::Schema(format!("cannot serialize model: {e}")))?;
    s.push('\n');
    Ok(s)
}

pub fn from_json(text: &str) -> Result<SpectralModel> {
    let probe: VersionProbe = serde_json::from_str::<serde_json::Value>(text)
        .and_then(serde_json::from_value)
        .map_err(|e| Error::Schema(format!("model file is not valid: {e}")))?;
    if probe.format_version != FORMAT_VERSION {
        return Err(Error::Version {
            found: probe.format_version,
            expected: FORMAT_VERSION,
        });
    }
    let f: ModelFile =
        serde_json::from_str(text).map_err(|e| Error::Schema(format!("model file is not valid: {e}")))?;
    if f.centers.len() != f.d || f.scales.len() != f.d {
        return Err(Error::Schema(format!(
            "d = {} but {} centers and {} scales",
            f.d,
            f.centers.len(),
            f.scales.len()
        )));
    }
    let scaling = ScalingParams::new(f.centers, f.scales, f.target_mean)
        .map_err(|e| Error::Schema(e.to_string()))?;
    let paths = f
        .paths
        .into_iter()
        .map(|p| p.into_path(f.d).map_err(|e| Error::Schema(e.to_string())))
        .collect::<Result<Vec<_>>>()?;
    let model = SpectralModel {
        paths,
        amplitudes: f.amplitudes,
        intercept: f.intercept,
        scaling,
        lambda_star: f.lambda_star,
        fit_trace: f.fit_trace,
        feature_names: f.feature_names,
        target_name: f.target_name,
    };
    model.validate()?;
    Ok(model)
}

pub fn save_model(model: &SpectralModel, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, to_json(model)?).map_err(|e| Error::io(path, e))
}

pub fn load_model(path: impl AsRef<Path>) -> Result<SpectralModel> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    from_json(&text)
}
