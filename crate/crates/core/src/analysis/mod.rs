//! Crosstalk matrices, quantum dit error rates and security-threshold verdicts.
//!
//! Matrices are laid out with rows indexed by the sent mode and columns by the detected
//! mode, so row normalization distributes each sent state's detection probability.

mod crosstalk;
mod export;
mod qder;
mod thresholds;

pub use crosstalk::{
    ensemble_average, ensemble_average_with, normalize_crosstalk, raw_projection_matrix, AveragingOrder,
    CrosstalkKind, CrosstalkMatrix,
};
pub use export::{crosstalk_csv, qder_summary_csv, QDER_SUMMARY_HEADER};
pub use qder::{qder, QderReport, ThresholdVerdict};
pub use thresholds::{threshold_lookup, Protocol, ThresholdEntry, ThresholdTable};

use thiserror::Error;

use crate::optics::OpticsError;

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("degenerate channel: row {row} of '{label}' has zero total probability")]
    DegenerateRow { row: usize, label: String },
    #[error("matrix is {rows}x{cols}; expected a square matrix of size {expected}")]
    BadShape { rows: usize, cols: usize, expected: usize },
    #[error("{0} rows is not a valid SIC matrix size (need d² with d >= 2)")]
    InvalidSicSize(usize),
    #[error("no realizations to average")]
    Empty,
    #[error("no {protocol} threshold available for d = {dim}")]
    NotAvailable { dim: usize, protocol: Protocol },
    #[error("threshold table: {0}")]
    InvalidTable(String),
    #[error(transparent)]
    Optics(#[from] OpticsError),
}

/// Serializes `Array2<f64>` as a list of rows.
pub(crate) mod nested {
    use ndarray::Array2;
    use serde::{de::Error, Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(m: &Array2<f64>, s: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<Vec<f64>> = m.rows().into_iter().map(|r| r.to_vec()).collect();
        rows.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Array2<f64>, D::Error> {
        let rows = Vec::<Vec<f64>>::deserialize(d)?;
        let n = rows.len();
        let m = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != m) {
            return Err(D::Error::custom("ragged matrix"));
        }
        Array2::from_shape_vec((n, m), rows.into_iter().flatten().collect()).map_err(D::Error::custom)
    }
}
