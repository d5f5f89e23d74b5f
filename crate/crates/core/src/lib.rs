//! Sparse directional-harmonic regression in Chebyshev angular coordinates.
//!
//! Inputs are squashed into angles `theta = arccos(tanh((x - c) / s))` and the
//! target is modelled as `c0 + sum_q A_q cos(m_q . theta)` over a greedily
//! selected set of integer frequency vectors `m_q`. Amplitudes come from
//! closed-form ridge solves on streamed normal equations.

pub mod baseline;
pub mod data_io;
pub mod error;
pub mod features;
pub mod greedy;
pub mod interpret;
pub mod matrix;
pub mod model;
pub mod paths;
pub mod pipeline;
pub mod preprocessing;
pub mod report;
pub mod solver;

pub use data_io::{load_csv, load_model, save_model, Dataset};
pub use error::{Error, Result};
pub use greedy::{fit, FitConfig};
pub use matrix::Matrix;
pub use model::{SpectralModel, TraceRecord};
pub use paths::FrequencyVector;
pub use pipeline::{fit_dataset, FitOutcome, SplitData};
