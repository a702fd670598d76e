//! Sampled transverse fields: LG carriers and their superpositions, discrete overlap
//! integrals and Fresnel propagation.

mod dump;
mod fft;
mod field;
mod grid;
mod propagate;

pub use dump::{field_dump, write_json, FieldDump};
pub use fft::Fft2;
pub use field::{lg_field, lg_field_with_policy, overlap, synthesize, AliasPolicy, FieldGrid, LgBank};
pub use grid::Grid;
pub use propagate::{fresnel_propagate, PropagationMethod, Propagated, EDGE_POWER_TOL};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum OpticsError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("amplitude array is not {expected}x{expected} (found {found} rows)")]
    ShapeMismatch { expected: usize, found: usize },
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("fields have different wavelengths")]
    WavelengthMismatch,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("no LG carrier sampled for charge {0}")]
    MissingCarrier(i32),
    #[error("field has zero or non-finite power")]
    ZeroField,
    #[error("aliasing: {reason}; try n = {suggested_n}, window = {suggested_window:.6e} m")]
    Aliasing {
        reason: String,
        suggested_n: usize,
        suggested_window: f64,
    },
    #[error("{0}: {1}")]
    Io(String, #[source] std::io::Error),
    #[error("JSON: {0}")]
    Json(#[from] serde_json::Error),
}
