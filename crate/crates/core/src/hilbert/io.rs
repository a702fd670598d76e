//! JSON import/export of bases.
//!
//! ```json
//! { "dim": 2, "kind": {"mub": 2},
//!   "labels": ["MUB2:v0", "MUB2:v1"],
//!   "vectors": [[[0.7071, 0.0], [0.0, 0.7071]], [[0.7071, 0.0], [0.0, -0.7071]]] }
//! ```
//!
//! `kind` is `"logical"`, `"angular"`, `"sic_povm"` or `{"mub": index}`. Each vector is a list
//! of `[re, im]` pairs over the logical indices. Vectors are written with the global phase
//! fixed (first nonzero coefficient real and non-negative).

use std::fs;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::basis::{BasisVector, ModeBasis, ModeBasisKind};
use super::HilbertError;

/// A complex number serialized as `[re, im]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexPair(pub f64, pub f64);

impl From<Complex64> for ComplexPair {
    fn from(c: Complex64) -> Self {
        ComplexPair(c.re, c.im)
    }
}

impl From<ComplexPair> for Complex64 {
    fn from(p: ComplexPair) -> Self {
        Complex64::new(p.0, p.1)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BasisDocument {
    pub dim: usize,
    pub kind: ModeBasisKind,
    #[serde(default)]
    pub labels: Vec<String>,
    pub vectors: Vec<Vec<ComplexPair>>,
}

impl From<&ModeBasis> for BasisDocument {
    fn from(b: &ModeBasis) -> Self {
        let normalized: Vec<BasisVector> = b.vectors().iter().map(BasisVector::phase_normalized).collect();
        BasisDocument {
            dim: b.dim(),
            kind: b.kind(),
            labels: normalized.iter().map(|v| v.label().to_string()).collect(),
            vectors: normalized
                .iter()
                .map(|v| v.coeffs().iter().copied().map(ComplexPair::from).collect())
                .collect(),
        }
    }
}

impl BasisDocument {
    /// Validates and rebuilds the basis. Vectors are renormalized, so hand-written files with
    /// rounded coefficients load cleanly.
    pub fn into_basis(self) -> Result<ModeBasis, HilbertError> {
        let tag = self.kind.tag();
        let vectors = self
            .vectors
            .into_iter()
            .enumerate()
            .map(|(i, v)| {
                let label = self.labels.get(i).cloned().unwrap_or_else(|| format!("{tag}:v{i}"));
                BasisVector::normalized(v.into_iter().map(Complex64::from).collect(), label)
            })
            .collect::<Result<Vec<_>, _>>()?;
        ModeBasis::new(self.dim, self.kind, vectors)
    }
}

pub fn basis_to_json(b: &ModeBasis) -> Result<String, HilbertError> {
    Ok(serde_json::to_string_pretty(&BasisDocument::from(b))?)
}

pub fn basis_from_json(text: &str) -> Result<ModeBasis, HilbertError> {
    serde_json::from_str::<BasisDocument>(text)?.into_basis()
}

/// Reads a single vector stored as a list of `[re, im]` pairs (e.g. a known SIC fiducial).
pub fn load_vector(path: &Path) -> Result<BasisVector, HilbertError> {
    let text = fs::read_to_string(path).map_err(|e| HilbertError::Io(path.display().to_string(), e))?;
    let pairs: Vec<ComplexPair> = serde_json::from_str(&text)?;
    let label = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    BasisVector::normalized(pairs.into_iter().map(Complex64::from).collect(), label)
}
