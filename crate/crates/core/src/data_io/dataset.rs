use std::path::Path;

use log::warn;

use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// A numeric table split into features and one target column.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub features: Matrix,
    pub target: Vec<f64>,
    pub feature_names: Vec<String>,
    pub target_name: String,
    /// Rows skipped because of empty or NaN cells.
    pub dropped_rows: usize,
}

impl Dataset {
    pub fn new(
        features: Matrix,
        target: Vec<f64>,
        feature_names: Vec<String>,
        target_name: String,
    ) -> Result<Self> {
        if features.rows() != target.len() {
            return Err(Error::Data(format!(
                "{} feature rows but {} targets",
                features.rows(),
                target.len()
            )));
        }
        if features.cols() != feature_names.len() {
            return Err(Error::Data(format!(
                "{} feature columns but {} names",
                features.cols(),
                feature_names.len()
            )));
        }
        Ok(Dataset {
            features,
            target,
            feature_names,
            target_name,
            dropped_rows: 0,
        })
    }

    pub fn len(&self) -> usize {
        self.features.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.target.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.features.cols()
    }

    pub fn subset(&self, idx: &[usize]) -> Dataset {
        Dataset {
            features: self.features.select_rows(idx),
            target: idx.iter().map(|&i| self.target[i]).collect(),
            feature_names: self.feature_names.clone(),
            target_name: self.target_name.clone(),
            dropped_rows: 0,
        }
    }

    /// Reorders feature columns to match `names` (e.g. a model's schema).
    pub fn select_features(&self, names: &[String]) -> Result<Matrix> {
        let cols: Vec<usize> = names
            .iter()
            .map(|n| {
                self.feature_names.iter().position(|f| f == n).ok_or_else(|| {
                    Error::Data(format!(
                        "feature column '{n}' not found; available: {}",
                        self.feature_names.join(", ")
                    ))
                })
            })
            .collect::<Result<_>>()?;
        let mut out = Matrix::zeros(self.len(), cols.len());
        for i in 0..self.len() {
            let src = self.features.row(i);
            for (o, &c) in out.row_mut(i).iter_mut().zip(&cols) {
                *o = src[c];
            }
        }
        Ok(out)
    }
}

fn missing(cell: &str) -> bool {
    let t = cell.trim();
    t.is_empty() || t.eq_ignore_ascii_case("nan") || t.eq_ignore_ascii_case("na")
}

/// Reads a header-first RFC-4180 CSV with numeric columns.
///
/// With `target_column = None` every column is treated as a feature and the
/// target vector is left empty (prediction input).
pub fn load_csv(path: impl AsRef<Path>, target_column: Option<&str>) -> Result<Dataset> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(file);
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| Error::Data(format!("{}: unreadable header: {e}", path.display())))?
        .iter()
        .map(str::to_owned)
        .collect();
    if header.is_empty() || header.iter().all(String::is_empty) {
        return Err(Error::Data(format!("{}: missing header row", path.display())));
    }
    let target_idx = match target_column {
        Some(t) => Some(header.iter().position(|h| h == t).ok_or_else(|| {
            Error::Data(format!(
                "target column '{t}' not found in {}; available columns: {}",
                path.display(),
                header.join(", ")
            ))
        })?),
        None => None,
    };
    let feature_names: Vec<String> = header
        .iter()
        .enumerate()
        .filter(|(i, _)| Some(*i) != target_idx)
        .map(|(_, h)| h.clone())
        .collect();

    let mut data = Vec::new();
    let mut target = Vec::new();
    let mut dropped = 0;
    let mut rows = 0;
    for (r, record) in reader.records().enumerate() {
        // header is line 1
        let line = r + 2;
        let record =
            record.map_err(|e| Error::Data(format!("{} line {line}: {e}", path.display())))?;
        if record.len() != header.len() {
            return Err(Error::Data(format!(
                "{} line {line}: expected {} fields, found {}",
                path.display(),
                header.len(),
                record.len()
            )));
        }
        if record.iter().any(missing) {
            dropped += 1;
            continue;
        }
        for (c, cell) in record.iter().enumerate() {
            let v: f64 = cell.parse().map_err(|_| {
                Error::Data(format!(
                    "{} line {line}: column '{}' has non-numeric value '{cell}'",
                    path.display(),
                    header[c]
                ))
            })?;
            if !v.is_finite() {
                return Err(Error::Data(format!(
                    "{} line {line}: column '{}' is not finite",
                    path.display(),
                    header[c]
                )));
            }
            if Some(c) == target_idx {
                target.push(v);
            } else {
                data.push(v);
            }
        }
        rows += 1;
    }
    if dropped > 0 {
        warn!("{}: dropped {dropped} rows with missing values", path.display());
    }
    Ok(Dataset {
        features: Matrix::from_vec(rows, feature_names.len(), data)?,
        target,
        feature_names,
        target_name: target_column.unwrap_or_default().to_owned(),
        dropped_rows: dropped,
    })
}

/// Writes features then target (if any) with a header row.
pub fn write_csv(dataset: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::Data(format!("{}: {e}", path.display())))?;
    let has_target = !dataset.target_name.is_empty();
    let mut header = dataset.feature_names.clone();
    if has_target {
        header.push(dataset.target_name.clone());
    }
    let csv_err = |e: csv::Error| Error::Data(format!("{}: {e}", path.display()));
    w.write_record(&header).map_err(csv_err)?;
    for i in 0..dataset.features.rows() {
        let mut rec: Vec<String> = dataset.features.row(i).iter().map(|v| v.to_string()).collect();
        if has_target {
            rec.push(dataset.target[i].to_string());
        }
        w.write_record(&rec).map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}
