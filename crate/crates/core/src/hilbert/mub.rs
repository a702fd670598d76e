//! Complete families of mutually unbiased bases.
//!
//! For a prime power `d = p^n` the family is the logical basis followed by `d` bases labelled
//! by field elements `a ∈ GF(d)`:
//!
//! * odd `p`: `v_{a,b}(x) = ω_p^{tr(a x² + b x)} / √d`, which for prime `d` reads
//!   `ω^{a j² + b j} / √d` (Wootters–Fields);
//! * `p = 2`: `v_{a,b}(x) = i^{Q_a(x)} (−1)^{tr(b x)} / √d`, where `Q_a` is the Z₄ lift of the
//!   trace form `tr(a x y)` written in the polynomial basis. For `d = 2` these are the Pauli
//!   X and Y eigenbases.
//!
//! The `a = 0` basis sits at family index 1. For prime `d` it is the Fourier (angular) basis.
//! Dimension 6 returns the partial family {logical, angular}.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::basis::{build_angular_basis, build_logical_basis, BasisVector, ModeBasis, ModeBasisKind};
use super::galois::{prime_power, GaloisField};
use super::HilbertError;

/// Largest prime-power dimension accepted by [`build_mub_family`].
pub const MAX_MUB_DIM: usize = 64;

#[derive(Clone, Debug)]
pub struct MubFamily {
    pub dim: usize,
    pub bases: Vec<ModeBasis>,
    /// `true` when fewer than `d + 1` bases are known (composite, non-prime-power `d`).
    pub partial: bool,
}

/// Whether a complete family is available for `d`.
pub fn is_supported_dim(d: usize) -> bool {
    d == 6 || (d <= MAX_MUB_DIM && prime_power(d).is_some())
}

pub fn build_mub_family(d: usize) -> Result<MubFamily, HilbertError> {
    if d < 2 {
        return Err(HilbertError::InvalidDimension(d));
    }
    if d == 6 {
        let mut angular = build_angular_basis(d)?;
        relabel(&mut angular, ModeBasisKind::Angular);
        return Ok(MubFamily {
            dim: d,
            bases: vec![build_logical_basis(d)?, angular],
            partial: true,
        });
    }
    if !is_supported_dim(d) {
        return Err(HilbertError::UnsupportedDimension(d));
    }

    let field = GaloisField::new(d)?;
    let mut bases = Vec::with_capacity(d + 1);
    bases.push(build_logical_basis(d)?);
    for a in 0..d {
        let index = a + 1;
        let vectors = (0..d)
            .map(|b| {
                let coeffs = if field.characteristic() == 2 {
                    even_vector(&field, a, b)
                } else {
                    odd_vector(&field, a, b)
                };
                BasisVector::new(coeffs, format!("MUB{index}:v{b}"))
            })
            .collect::<Result<Vec<_>, _>>()?;
        bases.push(ModeBasis::new(d, ModeBasisKind::Mub(index), vectors)?);
    }
    Ok(MubFamily {
        dim: d,
        bases,
        partial: false,
    })
}

fn relabel(basis: &mut ModeBasis, kind: ModeBasisKind) {
    let tag = kind.tag();
    let vectors = basis
        .vectors()
        .iter()
        .enumerate()
        .map(|(i, v)| v.clone().with_label(format!("{tag}:v{i}")))
        .collect();
    *basis = ModeBasis::new(basis.dim(), kind, vectors).expect("relabel keeps shape");
}

fn odd_vector(f: &GaloisField, a: usize, b: usize) -> Vec<Complex64> {
    let d = f.order();
    let p = f.characteristic() as f64;
    let scale = 1.0 / (d as f64).sqrt();
    (0..d)
        .map(|x| {
            let quad = f.mul(a, f.mul(x, x));
            let lin = f.mul(b, x);
            let t = f.trace(f.add(quad, lin)) as f64;
            Complex64::from_polar(scale, 2.0 * PI * t / p)
        })
        .collect()
}

fn even_vector(f: &GaloisField, a: usize, b: usize) -> Vec<Complex64> {
    let d = f.order();
    let n = f.degree();
    let scale = 1.0 / (d as f64).sqrt();
    // Trace-form matrix M[i][j] = tr(a e_i e_j) over GF(2).
    let m: Vec<Vec<usize>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| f.trace(f.mul(a, f.mul(f.basis_element(i), f.basis_element(j)))))
                .collect()
        })
        .collect();
    const I_POW: [Complex64; 4] = [
        Complex64::new(1.0, 0.0),
        Complex64::new(0.0, 1.0),
        Complex64::new(-1.0, 0.0),
        Complex64::new(0.0, -1.0),
    ];
    (0..d)
        .map(|x| {
            let bits: Vec<usize> = (0..n).map(|i| f.digit(x, i)).collect();
            let mut q = 0usize;
            for i in 0..n {
                q += m[i][i] * bits[i];
                for j in (i + 1)..n {
                    q += 2 * m[i][j] * bits[i] * bits[j];
                }
            }
            let sign = f.trace(f.mul(b, x));
            I_POW[(q + 2 * sign) % 4] * scale
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::certify::certify_mub;

    fn close(a: &[Complex64], b: &[Complex64], tol: f64) -> bool {
        a.iter().zip(b).all(|(x, y)| (x - y).norm() < tol)
    }

    #[test]
    fn qubit_family_is_pauli_eigenbases() {
        let fam = build_mub_family(2).unwrap();
        assert_eq!(fam.bases.len(), 3);
        let s = 1.0 / 2f64.sqrt();
        let c = |re: f64, im: f64| Complex64::new(re, im);
        // X eigenbasis
        assert!(close(fam.bases[1].vectors()[0].coeffs(), &[c(s, 0.0), c(s, 0.0)], 1e-15));
        assert!(close(fam.bases[1].vectors()[1].coeffs(), &[c(s, 0.0), c(-s, 0.0)], 1e-15));
        // Y eigenbasis
        assert!(close(fam.bases[2].vectors()[0].coeffs(), &[c(s, 0.0), c(0.0, s)], 1e-15));
        assert!(close(fam.bases[2].vectors()[1].coeffs(), &[c(s, 0.0), c(0.0, -s)], 1e-15));
    }

    #[test]
    fn prime_families_certify() {
        for d in [2, 3, 5, 7] {
            let fam = build_mub_family(d).unwrap();
            assert_eq!(fam.bases.len(), d + 1);
            assert!(!fam.partial);
            let report = certify_mub(&fam.bases, 1e-12).unwrap();
            assert!(report.pass, "d={d}: {report:?}");
        }
    }

    #[test]
    fn prime_power_families_certify() {
        for d in [4, 8, 9, 16] {
            let fam = build_mub_family(d).unwrap();
            assert_eq!(fam.bases.len(), d + 1);
            let report = certify_mub(&fam.bases, 1e-10).unwrap();
            assert!(report.pass, "d={d}: {report:?}");
        }
    }

    #[test]
    fn first_mub_is_fourier_for_prime_d() {
        for d in [2, 3, 5, 7] {
            let fam = build_mub_family(d).unwrap();
            let ang = build_angular_basis(d).unwrap();
            for (u, v) in fam.bases[1].vectors().iter().zip(ang.vectors()) {
                // Equal up to a global phase.
                assert!((u.inner(v).norm() - 1.0).abs() < 1e-12, "d={d}");
            }
        }
    }

    #[test]
    fn dimension_six_is_partial() {
        let fam = build_mub_family(6).unwrap();
        assert!(fam.partial);
        assert_eq!(fam.bases.len(), 2);
        assert_eq!(fam.bases[0].kind(), ModeBasisKind::Logical);
        assert_eq!(fam.bases[1].kind(), ModeBasisKind::Angular);
        assert!(certify_mub(&fam.bases, 1e-12).unwrap().pass);
    }

    #[test]
    fn unsupported_dimensions_error() {
        assert!(matches!(build_mub_family(10), Err(HilbertError::UnsupportedDimension(10))));
        assert!(matches!(build_mub_family(12), Err(HilbertError::UnsupportedDimension(12))));
        assert!(matches!(build_mub_family(1), Err(HilbertError::InvalidDimension(1))));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn any_two_family_vectors_are_unbiased(
                d in prop::sample::select(vec![2usize, 3, 4, 5, 7, 8]),
                picks in (0usize..64, 0usize..64, 0usize..64, 0usize..64),
            ) {
                let fam = build_mub_family(d).unwrap();
                let (a, b) = (picks.0 % (d + 1), picks.1 % (d + 1));
                let (i, j) = (picks.2 % d, picks.3 % d);
                let u = &fam.bases[a].vectors()[i];
                let v = &fam.bases[b].vectors()[j];
                let p = u.inner(v).norm_sqr();
                let expected = if a != b { 1.0 / d as f64 } else if i == j { 1.0 } else { 0.0 };
                prop_assert!((p - expected).abs() < 1e-12, "d={} {}:{} {}:{} -> {}", d, a, i, b, j, p);
            }
        }
    }
}

