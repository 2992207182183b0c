//! Run descriptions, parameter sweeps and named presets.

mod config;
mod initial;
mod presets;
mod sweep;

use thiserror::Error;

use crate::correlations::CorrelationError;
use crate::floquet::FloquetError;
use crate::lindblad::LindbladError;
use crate::metrics::MetricsError;
use crate::network::NetworkError;
use crate::qops::QopsError;

pub use config::{Axis, OutputSpec, ScenarioConfig, SweepSpec};
pub use initial::{initial_state, InitialStateSpec};
pub use presets::{preset, preset_names, run_fmap, run_preset, FmapSpec, PresetJob, PresetOptions};
pub use sweep::{
    evaluate_point, resolve_point, run_sweep, sweep_points, PointMetrics, PointResult, SweepPoint,
    SweepSummary,
};

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("unknown preset {0:?}")]
    UnknownPreset(String),
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Lindblad(#[from] LindbladError),
    #[error(transparent)]
    Floquet(#[from] FloquetError),
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error(transparent)]
    Qops(#[from] QopsError),
    #[error(transparent)]
    Correlation(#[from] CorrelationError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
}
