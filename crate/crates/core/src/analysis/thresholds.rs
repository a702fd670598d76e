use std::fmt;

use serde::{Deserialize, Serialize};

use super::AnalysisError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Protocol {
    Bb84,
    MubProtocol,
    Singapore,
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Protocol::Bb84 => "BB84",
            Protocol::MubProtocol => "MUB",
            Protocol::Singapore => "Singapore",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdEntry {
    pub dim: usize,
    pub protocol: Protocol,
    /// Fraction, not percent.
    pub threshold: f64,
}

/// Security thresholds on the QDER, keyed by `(dimension, protocol)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdTable {
    entries: Vec<ThresholdEntry>,
}

/// `(d, BB84, MUB protocol)` as fractions of the two-decimal percentages.
const PUBLISHED: [(usize, f64, f64); 6] = [
    (2, 0.1100, 0.1262),
    (3, 0.1595, 0.1914),
    (4, 0.1893, 0.2317),
    (5, 0.2099, 0.2594),
    (6, 0.2250, 0.2797),
    (8, 0.2470, 0.3077),
];

impl Default for ThresholdTable {
    fn default() -> Self {
        let entries = PUBLISHED
            .iter()
            .flat_map(|&(dim, bb84, mub)| {
                [
                    ThresholdEntry {
                        dim,
                        protocol: Protocol::Bb84,
                        threshold: bb84,
                    },
                    ThresholdEntry {
                        dim,
                        protocol: Protocol::MubProtocol,
                        threshold: mub,
                    },
                ]
            })
            .collect();
        Self { entries }
    }
}

impl ThresholdTable {
    /// Builds a table and checks that each protocol's thresholds strictly increase with `d`.
    pub fn new(mut entries: Vec<ThresholdEntry>) -> Result<Self, AnalysisError> {
        entries.sort_by(|a, b| a.protocol.cmp(&b.protocol).then(a.dim.cmp(&b.dim)));
        for w in entries.windows(2) {
            if w[0].protocol != w[1].protocol {
                continue;
            }
            if w[0].dim == w[1].dim {
                return Err(AnalysisError::InvalidTable(format!("duplicate {} entry for d = {}", w[0].protocol, w[0].dim)));
            }
            if w[1].threshold <= w[0].threshold {
                return Err(AnalysisError::InvalidTable(format!(
                    "{} thresholds must increase with dimension (d = {} → {})",
                    w[0].protocol, w[0].dim, w[1].dim
                )));
            }
        }
        if let Some(e) = entries.iter().find(|e| !(0.0..=1.0).contains(&e.threshold)) {
            return Err(AnalysisError::InvalidTable(format!("threshold {} is not a fraction", e.threshold)));
        }
        Ok(Self { entries })
    }

    /// The built-in table extended with caller-supplied entries (e.g. Singapore thresholds).
    pub fn with_extra(extra: &[ThresholdEntry]) -> Result<Self, AnalysisError> {
        let mut entries = Self::default().entries;
        entries.extend_from_slice(extra);
        Self::new(entries)
    }

    pub fn entries(&self) -> &[ThresholdEntry] {
        &self.entries
    }

    pub fn lookup(&self, dim: usize, protocol: Protocol) -> Result<f64, AnalysisError> {
        self.entries
            .iter()
            .find(|e| e.dim == dim && e.protocol == protocol)
            .map(|e| e.threshold)
            .ok_or(AnalysisError::NotAvailable { dim, protocol })
    }

    pub fn for_dim(&self, dim: usize) -> Vec<ThresholdEntry> {
        let mut v: Vec<_> = self.entries.iter().copied().filter(|e| e.dim == dim).collect();
        v.sort_by_key(|e| e.protocol);
        v
    }
}

/// Looks up the built-in table.
pub fn threshold_lookup(dim: usize, protocol: Protocol) -> Result<f64, AnalysisError> {
    ThresholdTable::default().lookup(dim, protocol)
}
