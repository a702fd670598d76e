//! Weyl–Heisenberg displacement operators `D_{kj} = Σ_m ω^{jm} |k ⊕ m><m|`.

use std::f64::consts::PI;

use ndarray::Array2;
use num_complex::Complex64;

use super::HilbertError;

/// Dense `d × d` matrix of `D_{kj}`.
pub fn displacement_operator(d: usize, k: usize, j: usize) -> Result<Array2<Complex64>, HilbertError> {
    if d < 2 {
        return Err(HilbertError::InvalidDimension(d));
    }
    for idx in [k, j] {
        if idx >= d {
            return Err(HilbertError::IndexOutOfRange { index: idx, dim: d });
        }
    }
    let mut out = Array2::zeros((d, d));
    for m in 0..d {
        out[[(m + k) % d, m]] = omega_pow(d, j * m);
    }
    Ok(out)
}

/// `ω^e` with `ω = e^{2πi/d}`; the exponent is reduced mod `d` first.
pub(crate) fn omega_pow(d: usize, e: usize) -> Complex64 {
    Complex64::from_polar(1.0, 2.0 * PI * (e % d) as f64 / d as f64)
}

/// `D_{kj}·ψ` without forming the matrix.
pub fn displace(psi: &[Complex64], k: usize, j: usize) -> Vec<Complex64> {
    let d = psi.len();
    let mut out = vec![Complex64::new(0.0, 0.0); d];
    for (m, &c) in psi.iter().enumerate() {
        out[(m + k) % d] = omega_pow(d, j * m) * c;
    }
    out
}

/// Precomputed phases `ω^e` for `e = 0..d`, used by the hot loops of the fiducial search.
#[derive(Clone, Debug)]
pub(crate) struct PhaseTable {
    roots: Vec<Complex64>,
}

impl PhaseTable {
    pub fn new(d: usize) -> Self {
        Self {
            roots: (0..d).map(|e| omega_pow(d, e)).collect(),
        }
    }

    #[inline]
    pub fn get(&self, e: usize) -> Complex64 {
        self.roots[e % self.roots.len()]
    }
}
