use serde::{Deserialize, Serialize};

use super::crosstalk::{CrosstalkKind, CrosstalkMatrix};
use super::thresholds::{Protocol, ThresholdTable};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdVerdict {
    pub protocol: Protocol,
    pub threshold: f64,
    /// `qder < threshold`.
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QderReport {
    pub label: String,
    pub dim: usize,
    pub kind: CrosstalkKind,
    pub qder: f64,
    /// Population standard deviation of the diagonal elements.
    pub stddev: f64,
    pub thresholds: Vec<ThresholdVerdict>,
}

impl QderReport {
    /// Attaches a verdict for every protocol the table covers at this dimension.
    pub fn with_thresholds(mut self, table: &ThresholdTable) -> Self {
        self.thresholds = table
            .for_dim(self.dim)
            .into_iter()
            .map(|e| ThresholdVerdict {
                protocol: e.protocol,
                threshold: e.threshold,
                pass: self.qder < e.threshold,
            })
            .collect();
        self
    }

    pub fn verdict(&self, protocol: Protocol) -> Option<&ThresholdVerdict> {
        self.thresholds.iter().find(|v| v.protocol == protocol)
    }
}

/// `1 − Tr(C)/R` for an `R×R` matrix: `R = d` for MUB-like and `d²` for SIC-like channels.
///
/// An ideal SIC channel has unit diagonal after its rows are scaled to `d`, so both kinds
/// read zero for a perfect channel. Values are clamped to `[0, 1]`.
pub fn qder(c: &CrosstalkMatrix) -> QderReport {
    let diag = c.diagonal();
    let r = diag.len() as f64;
    let trace: f64 = diag.iter().sum();
    let qder = (1.0 - trace / r).clamp(0.0, 1.0);
    let mean = trace / r;
    let var = diag.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / r;
    QderReport {
        label: c.label.clone(),
        dim: c.dim,
        kind: c.kind,
        qder,
        stddev: var.sqrt(),
        thresholds: Vec::new(),
    }
}
