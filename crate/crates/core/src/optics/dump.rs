//! Field dumps for inspection and plotting.
//!
//! ```json
//! { "label": "MUB1:v0", "n": 128, "stride": 4, "pitch": 1.8e-5, "window": 0.0226,
//!   "wavelength": 6.33e-7, "z": 0.0, "re": [[...], ...], "im": [[...], ...] }
//! ```
//!
//! `n` is the number of samples per side after decimation by `stride`; `pitch` is the
//! spacing of the written samples; rows run along `y`.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::field::FieldGrid;
use super::OpticsError;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FieldDump {
    pub label: String,
    pub n: usize,
    pub stride: usize,
    pub pitch: f64,
    pub window: f64,
    pub wavelength: f64,
    pub z: f64,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

pub fn field_dump(f: &FieldGrid, label: &str, stride: usize) -> FieldDump {
    let stride = stride.max(1);
    let rows: Vec<usize> = (0..f.grid.n()).step_by(stride).collect();
    let take = |part: fn(&num_complex::Complex64) -> f64| -> Vec<Vec<f64>> {
        rows.iter()
            .map(|&iy| rows.iter().map(|&ix| part(&f.amplitudes[[iy, ix]])).collect())
            .collect()
    };
    FieldDump {
        label: label.to_string(),
        n: rows.len(),
        stride,
        pitch: f.grid.pitch() * stride as f64,
        window: f.grid.window(),
        wavelength: f.wavelength,
        z: f.z,
        re: take(|c| c.re),
        im: take(|c| c.im),
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), OpticsError> {
    let text = serde_json::to_string(value)?;
    fs::write(path, text).map_err(|e| OpticsError::Io(path.display().to_string(), e))
}
