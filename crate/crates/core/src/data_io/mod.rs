//! Reproducibility plumbing: CSV ingestion, seeded splits, metrics and
//! model serialization.

pub mod dataset;
pub mod metrics;
pub mod model_io;
pub mod split;

pub use dataset::{load_csv, write_csv, Dataset};
pub use metrics::{nrmse_sigma, r2};
pub use model_io::{load_model, save_model, FORMAT_VERSION};
pub use split::{split, SplitIndices, SplitMix64};
