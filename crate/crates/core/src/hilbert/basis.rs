use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::HilbertError;

/// Tolerance on the unit-norm invariant of a [`BasisVector`].
pub const NORM_TOL: f64 = 1e-12;

/// A unit vector over the logical index space `j = 0..d-1`.
#[derive(Clone, Debug, PartialEq)]
pub struct BasisVector {
    coeffs: Vec<Complex64>,
    label: String,
}

impl BasisVector {
    /// Wraps coefficients that are already unit-norm.
    pub fn new(coeffs: Vec<Complex64>, label: impl Into<String>) -> Result<Self, HilbertError> {
        check_dim(coeffs.len())?;
        let norm2 = norm_sqr(&coeffs);
        if (norm2 - 1.0).abs() > NORM_TOL {
            return Err(HilbertError::NotNormalized { norm: norm2.sqrt() });
        }
        Ok(Self {
            coeffs,
            label: label.into(),
        })
    }

    /// Rescales `coeffs` to unit norm.
    pub fn normalized(mut coeffs: Vec<Complex64>, label: impl Into<String>) -> Result<Self, HilbertError> {
        check_dim(coeffs.len())?;
        let norm = norm_sqr(&coeffs).sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(HilbertError::NotNormalized { norm });
        }
        for c in &mut coeffs {
            *c /= norm;
        }
        Ok(Self {
            coeffs,
            label: label.into(),
        })
    }

    /// Logical ket `|j>`.
    pub fn logical(dim: usize, j: usize) -> Result<Self, HilbertError> {
        check_dim(dim)?;
        if j >= dim {
            return Err(HilbertError::IndexOutOfRange { index: j, dim });
        }
        let mut coeffs = vec![Complex64::new(0.0, 0.0); dim];
        coeffs[j] = Complex64::new(1.0, 0.0);
        Ok(Self {
            coeffs,
            label: format!("L:{j}"),
        })
    }

    pub fn dim(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &BasisVector) -> Complex64 {
        inner(&self.coeffs, &other.coeffs)
    }

    /// Copy with the global phase fixed so the first nonzero coefficient is real and
    /// non-negative.
    pub fn phase_normalized(&self) -> BasisVector {
        let mut coeffs = self.coeffs.clone();
        if let Some(first) = coeffs.iter().find(|c| c.norm() > NORM_TOL).copied() {
            let phase = first / first.norm();
            for c in &mut coeffs {
                *c /= phase;
            }
        }
        BasisVector {
            coeffs,
            label: self.label.clone(),
        }
    }
}

pub(crate) fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub(crate) fn norm_sqr(v: &[Complex64]) -> f64 {
    v.iter().map(|c| c.norm_sqr()).sum()
}

fn check_dim(dim: usize) -> Result<(), HilbertError> {
    if dim < 2 {
        Err(HilbertError::InvalidDimension(dim))
    } else {
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeBasisKind {
    Logical,
    /// Member of a mutually unbiased family; the index is the position in the family.
    Mub(usize),
    Angular,
    SicPovm,
}

impl ModeBasisKind {
    /// Short identifier used in labels and file names.
    pub fn tag(&self) -> String {
        match self {
            ModeBasisKind::Logical => "MUB0".to_string(),
            ModeBasisKind::Mub(i) => format!("MUB{i}"),
            ModeBasisKind::Angular => "ANG".to_string(),
            ModeBasisKind::SicPovm => "SIC".to_string(),
        }
    }
}

impl fmt::Display for ModeBasisKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModeBasisKind::Logical => write!(f, "MUB 0 (OAM)"),
            ModeBasisKind::Mub(i) => write!(f, "MUB {i}"),
            ModeBasisKind::Angular => write!(f, "ANG"),
            ModeBasisKind::SicPovm => write!(f, "SIC-POVM"),
        }
    }
}

/// A measurement basis (or SIC-POVM) over a `d`-dimensional space.
#[derive(Clone, Debug, PartialEq)]
pub struct ModeBasis {
    dim: usize,
    kind: ModeBasisKind,
    vectors: Vec<BasisVector>,
}

impl ModeBasis {
    /// Checks the size invariant for `kind` and that every vector has dimension `dim`.
    pub fn new(dim: usize, kind: ModeBasisKind, vectors: Vec<BasisVector>) -> Result<Self, HilbertError> {
        check_dim(dim)?;
        if let Some(v) = vectors.iter().find(|v| v.dim() != dim) {
            return Err(HilbertError::DimensionMismatch {
                expected: dim,
                found: v.dim(),
            });
        }
        let expected = match kind {
            ModeBasisKind::SicPovm => dim * dim,
            _ => dim,
        };
        if vectors.len() != expected {
            return Err(HilbertError::WrongVectorCount {
                kind,
                expected,
                found: vectors.len(),
            });
        }
        Ok(Self { dim, kind, vectors })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> ModeBasisKind {
        self.kind
    }

    pub fn vectors(&self) -> &[BasisVector] {
        &self.vectors
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    /// Gram matrix `G[a][b] = <v_a|v_b>` as row-major vectors.
    pub fn gram(&self) -> Vec<Vec<Complex64>> {
        self.vectors
            .iter()
            .map(|a| self.vectors.iter().map(|b| a.inner(b)).collect())
            .collect()
    }

    pub fn tag(&self) -> String {
        self.kind.tag()
    }
}

/// Bijection between logical indices `j` and OAM topological charges `ℓ`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OamIndexMap {
    dim: usize,
    ells: Vec<i32>,
}

impl OamIndexMap {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Charges ordered by logical index.
    pub fn ells(&self) -> &[i32] {
        &self.ells
    }

    pub fn ell(&self, j: usize) -> i32 {
        self.ells[j]
    }

    pub fn index_of(&self, ell: i32) -> Option<usize> {
        self.ells.iter().position(|&l| l == ell)
    }
}

/// Logical OAM charges for dimension `d`.
///
/// Even `d` skips `ℓ = 0` and uses `|j> = d/2 + (ℓ-1)Θ(ℓ) + ℓΘ(-ℓ)`; odd `d` keeps the
/// Gaussian mode and uses the symmetric range `j = ℓ + (d-1)/2`.
pub fn logical_index_map(d: usize) -> Result<OamIndexMap, HilbertError> {
    check_dim(d)?;
    let half = (d / 2) as i32;
    let ells: Vec<i32> = if d % 2 == 0 {
        (-half..=half).filter(|&l| l != 0).collect()
    } else {
        (-half..=half).collect()
    };
    debug_assert_eq!(ells.len(), d);
    Ok(OamIndexMap { dim: d, ells })
}

/// The logical (OAM) basis `{|j>}`.
pub fn build_logical_basis(d: usize) -> Result<ModeBasis, HilbertError> {
    let vectors = (0..d)
        .map(|j| BasisVector::logical(d, j).map(|v| v.with_label(format!("MUB0:v{j}"))))
        .collect::<Result<Vec<_>, _>>()?;
    ModeBasis::new(d, ModeBasisKind::Logical, vectors)
}

/// Discrete Fourier conjugate of the logical basis, `|φ_k> = Σ_j e^{2πi jk/d}|j>/√d`.
pub fn build_angular_basis(d: usize) -> Result<ModeBasis, HilbertError> {
    check_dim(d)?;
    let scale = 1.0 / (d as f64).sqrt();
    let vectors = (0..d)
        .map(|k| {
            let coeffs = (0..d)
                .map(|j| Complex64::from_polar(scale, 2.0 * PI * ((j * k) % d) as f64 / d as f64))
                .collect();
            BasisVector::new(coeffs, format!("ANG:v{k}"))
        })
        .collect::<Result<Vec<_>, _>>()?;
    ModeBasis::new(d, ModeBasisKind::Angular, vectors)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// `|j> = d/2 + (ℓ-1)Θ(ℓ) + ℓΘ(-ℓ)` with Θ(0) = 1, evaluated literally.
    fn j_of_ell(d: usize, ell: i32) -> f64 {
        let theta = |x: i32| if x >= 0 { 1.0 } else { 0.0 };
        d as f64 / 2.0 + (ell as f64 - 1.0) * theta(ell) + ell as f64 * theta(-ell)
    }

    #[test]
    fn index_map_matches_charge_formula_for_even_d() {
        for d in [2usize, 4, 6, 8] {
            let map = logical_index_map(d).unwrap();
            // Brute-force: scan a generous ℓ window and keep the charges that land on 0..d-1.
            let mut hits = vec![None; d];
            for ell in -(d as i32)..=(d as i32) {
                if ell == 0 {
                    continue;
                }
                let j = j_of_ell(d, ell);
                if j.fract() == 0.0 && j >= 0.0 && (j as usize) < d {
                    assert!(hits[j as usize].is_none(), "formula is not injective at d={d}");
                    hits[j as usize] = Some(ell);
                }
            }
            let from_formula: Vec<i32> = hits.into_iter().map(Option::unwrap).collect();
            assert_eq!(map.ells(), from_formula.as_slice(), "d={d}");
        }
    }

    #[test]
    fn index_map_examples() {
        assert_eq!(logical_index_map(4).unwrap().ells(), &[-2, -1, 1, 2]);
        assert_eq!(logical_index_map(3).unwrap().ells(), &[-1, 0, 1]);
        assert_eq!(logical_index_map(2).unwrap().ells(), &[-1, 1]);
        assert_eq!(logical_index_map(5).unwrap().ells(), &[-2, -1, 0, 1, 2]);
        assert!(matches!(logical_index_map(1), Err(HilbertError::InvalidDimension(1))));
    }

    #[test]
    fn index_map_is_a_bijection() {
        for d in 2..20 {
            let map = logical_index_map(d).unwrap();
            for (j, &ell) in map.ells().iter().enumerate() {
                assert_eq!(map.index_of(ell), Some(j));
            }
            assert!(map.ells().windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn angular_examples() {
        let b2 = build_angular_basis(2).unwrap();
        let s = 1.0 / 2f64.sqrt();
        for c in b2.vectors()[0].coeffs() {
            assert!((c - Complex64::new(s, 0.0)).norm() < 1e-15);
        }
        let b4 = build_angular_basis(4).unwrap();
        let expected = [
            Complex64::new(0.5, 0.0),
            Complex64::new(0.0, 0.5),
            Complex64::new(-0.5, 0.0),
            Complex64::new(0.0, -0.5),
        ];
        for (c, e) in b4.vectors()[1].coeffs().iter().zip(expected) {
            assert!((c - e).norm() < 1e-15);
        }
    }

    #[test]
    fn angular_is_unbiased_wrt_logical() {
        for d in 2..12 {
            let ang = build_angular_basis(d).unwrap();
            let log = build_logical_basis(d).unwrap();
            for a in ang.vectors() {
                for l in log.vectors() {
                    assert!((a.inner(l).norm_sqr() - 1.0 / d as f64).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn vector_constructor_rejects_bad_input() {
        let c = Complex64::new(1.0, 0.0);
        assert!(matches!(BasisVector::new(vec![c], "x"), Err(HilbertError::InvalidDimension(1))));
        assert!(matches!(
            BasisVector::new(vec![c, c], "x"),
            Err(HilbertError::NotNormalized { .. })
        ));
        let v = BasisVector::normalized(vec![c, c], "x").unwrap();
        assert!((norm_sqr(v.coeffs()) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn phase_normalization_makes_first_coefficient_real() {
        let v = BasisVector::normalized(
            vec![Complex64::new(0.0, 0.0), Complex64::new(0.0, 3.0), Complex64::new(1.0, 1.0)],
            "x",
        )
        .unwrap();
        let p = v.phase_normalized();
        assert!(p.coeffs()[1].im.abs() < 1e-15 && p.coeffs()[1].re > 0.0);
        assert!((p.inner(&v).norm() - 1.0).abs() < 1e-14);
    }
}
