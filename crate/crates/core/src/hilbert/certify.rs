use num_complex::Complex64;
use serde::Serialize;

use super::basis::{ModeBasis, ModeBasisKind};
use super::HilbertError;

/// Location of the worst overlap found by [`certify_mub`]: `(basis, vector)` pairs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct WorstPair {
    pub a: (usize, usize),
    pub b: (usize, usize),
}

#[derive(Clone, Debug, Serialize)]
pub struct MubCertificate {
    pub dim: usize,
    pub bases: usize,
    /// max |G_ab − δ_ab| over every basis' Gram matrix.
    pub max_gram_deviation: f64,
    /// max | |<u|v>|² − 1/d | over vectors from distinct bases.
    pub max_unbiased_deviation: f64,
    pub worst_gram: Option<WorstPair>,
    pub worst_unbiased: Option<WorstPair>,
    pub tol: f64,
    pub pass: bool,
}

pub fn certify_mub(family: &[ModeBasis], tol: f64) -> Result<MubCertificate, HilbertError> {
    let dim = family.first().map(ModeBasis::dim).unwrap_or(0);
    if let Some(b) = family.iter().find(|b| b.dim() != dim) {
        return Err(HilbertError::DimensionMismatch {
            expected: dim,
            found: b.dim(),
        });
    }

    let mut max_gram = 0.0f64;
    let mut worst_gram = None;
    for (bi, basis) in family.iter().enumerate() {
        for (i, u) in basis.vectors().iter().enumerate() {
            for (j, v) in basis.vectors().iter().enumerate() {
                let target = if i == j { 1.0 } else { 0.0 };
                let dev = (u.inner(v) - Complex64::new(target, 0.0)).norm();
                if dev > max_gram {
                    max_gram = dev;
                    worst_gram = Some(WorstPair { a: (bi, i), b: (bi, j) });
                }
            }
        }
    }

    let unbiased = 1.0 / dim.max(1) as f64;
    let mut max_unb = 0.0f64;
    let mut worst_unb = None;
    for (ai, a) in family.iter().enumerate() {
        for (bi, b) in family.iter().enumerate().skip(ai + 1) {
            for (i, u) in a.vectors().iter().enumerate() {
                for (j, v) in b.vectors().iter().enumerate() {
                    let dev = (u.inner(v).norm_sqr() - unbiased).abs();
                    if dev > max_unb {
                        max_unb = dev;
                        worst_unb = Some(WorstPair { a: (ai, i), b: (bi, j) });
                    }
                }
            }
        }
    }

    Ok(MubCertificate {
        dim,
        bases: family.len(),
        max_gram_deviation: max_gram,
        max_unbiased_deviation: max_unb,
        worst_gram,
        worst_unbiased: worst_unb,
        tol,
        pass: max_gram <= tol && max_unb <= tol,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct SicCertificate {
    pub dim: usize,
    /// max | |<φ_a|φ_b>|² − 1/(d+1) | over distinct pairs.
    pub max_equiangular_deviation: f64,
    /// max entry of |(1/d) Σ_a |φ_a><φ_a| − I|.
    pub identity_residual: f64,
    pub worst_pair: Option<(usize, usize)>,
    pub tol: f64,
    pub pass: bool,
}

pub fn certify_sic(basis: &ModeBasis, tol: f64) -> Result<SicCertificate, HilbertError> {
    if basis.kind() != ModeBasisKind::SicPovm {
        return Err(HilbertError::WrongKind {
            expected: ModeBasisKind::SicPovm,
            found: basis.kind(),
        });
    }
    let d = basis.dim();
    let target = 1.0 / (d as f64 + 1.0);
    let vectors = basis.vectors();

    let mut max_dev = 0.0f64;
    let mut worst = None;
    for (a, u) in vectors.iter().enumerate() {
        for (b, v) in vectors.iter().enumerate().skip(a + 1) {
            let dev = (u.inner(v).norm_sqr() - target).abs();
            if dev > max_dev {
                max_dev = dev;
                worst = Some((a, b));
            }
        }
    }

    let mut frame = vec![Complex64::new(0.0, 0.0); d * d];
    for v in vectors {
        let c = v.coeffs();
        for r in 0..d {
            for s in 0..d {
                frame[r * d + s] += c[r] * c[s].conj();
            }
        }
    }
    let mut identity_residual = 0.0f64;
    for r in 0..d {
        for s in 0..d {
            let target = if r == s { 1.0 } else { 0.0 };
            let dev = (frame[r * d + s] / d as f64 - Complex64::new(target, 0.0)).norm();
            identity_residual = identity_residual.max(dev);
        }
    }

    Ok(SicCertificate {
        dim: d,
        max_equiangular_deviation: max_dev,
        identity_residual,
        worst_pair: worst,
        tol,
        pass: max_dev <= tol && identity_residual <= tol,
    })
}
