//! End-to-end experiments: configuration, basis selection, the channel engine, ensemble
//! runs with report output, turbulence calibration and the built-in validation suite.

mod bases;
mod calibrate;
mod config;
mod engine;
mod run;
mod validate;

pub use bases::{build_dimension_bases, DimensionBases, FiducialRecord};
pub use calibrate::{calibrate_cn2, CalibrationOptions, CalibrationResult, CalibrationTarget};
pub use config::{
    AoConfig, AoSetting, BasisSelection, ChannelConfig, GridConfig, SicConfig, SimConfig, DEFAULT_APERTURE,
    DEFAULT_CN2, DEFAULT_DIMENSIONS, DEFAULT_LENGTH, DEFAULT_W0,
};
pub use engine::{ChannelEngine, PreparedBasis};
pub use run::{run_experiment, run_experiment_on, write_field_dumps, write_outputs, BasisResult, DerivedMetadata, RunReport, SoftwareInfo, Timing};
pub use validate::{run_validation, ValidationCheck, ValidationReport};

use thiserror::Error;

use crate::analysis::AnalysisError;
use crate::hilbert::HilbertError;
use crate::optics::OpticsError;
use crate::turbulence::TurbulenceError;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("configuration: {0}")]
    Config(String),
    #[error("{0}: {1}")]
    Io(String, #[source] std::io::Error),
    #[error("JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Hilbert(#[from] HilbertError),
    #[error(transparent)]
    Optics(#[from] OpticsError),
    #[error(transparent)]
    Turbulence(#[from] TurbulenceError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error("realization {index} ({label}): {source}")]
    InRealization {
        index: usize,
        label: String,
        #[source]
        source: Box<HarnessError>,
    },
    #[error("calibration cannot reach QDER {target}: reachable range is [{min}, {max}]")]
    CalibrationFailed { target: f64, min: f64, max: f64 },
}

impl HarnessError {
    /// Stable machine-readable category.
    pub fn kind(&self) -> &'static str {
        match self {
            HarnessError::Config(_) => "config",
            HarnessError::Io(..) => "io",
            HarnessError::Json(_) => "json",
            HarnessError::Hilbert(_) => "hilbert",
            HarnessError::Optics(OpticsError::Aliasing { .. }) => "aliasing",
            HarnessError::Optics(_) => "optics",
            HarnessError::Turbulence(_) => "turbulence",
            HarnessError::Analysis(AnalysisError::DegenerateRow { .. }) => "degenerate_channel",
            HarnessError::Analysis(_) => "analysis",
            HarnessError::InRealization { source, .. } => source.kind(),
            HarnessError::CalibrationFailed { .. } => "calibration_failed",
        }
    }
}
