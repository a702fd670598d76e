use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::TurbulenceError;
use crate::optics::Grid;

const MAX_RADIAL_ORDER: u32 = 40;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ZernikeIndex {
    pub n: u32,
    pub m: i32,
}

impl ZernikeIndex {
    pub fn new(n: u32, m: i32) -> Result<Self, TurbulenceError> {
        let ma = m.unsigned_abs();
        if n < ma || (n - ma) % 2 == 1 || n > MAX_RADIAL_ORDER {
            return Err(TurbulenceError::InvalidIndex { n, m });
        }
        if n == 0 {
            return Err(TurbulenceError::Piston);
        }
        Ok(Self { n, m })
    }
}

impl std::fmt::Display for ZernikeIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Z({},{})", self.n, self.m)
    }
}

/// All modes with `1 ≤ n ≤ max_order`, ordered by `n` then `m` ascending. `m = 0` terms are
/// present only when `include_m0` is set.
pub fn mode_indices(max_order: u32, include_m0: bool) -> Vec<ZernikeIndex> {
    let mut out = Vec::new();
    for n in 1..=max_order.min(MAX_RADIAL_ORDER) {
        let n_i = n as i32;
        for m in (-n_i..=n_i).step_by(2) {
            if m != 0 || include_m0 {
                out.push(ZernikeIndex { n, m });
            }
        }
    }
    out
}

fn factorial(k: u32) -> f64 {
    (1..=k).map(f64::from).product()
}

/// `R_n^m(ρ) = Σ_k (−1)^k (n−k)! / (k! ((n+m)/2−k)! ((n−m)/2−k)!) ρ^{n−2k}`; zero when `n − m`
/// is odd.
pub fn zernike_radial(n: u32, m_abs: u32, rho: f64) -> Result<f64, TurbulenceError> {
    if n < m_abs || n > MAX_RADIAL_ORDER {
        return Err(TurbulenceError::InvalidIndex { n, m: m_abs as i32 });
    }
    if !(0.0..=1.0).contains(&rho) {
        return Err(TurbulenceError::Domain(rho));
    }
    Ok(radial_unchecked(n, m_abs, rho))
}

fn radial_unchecked(n: u32, m_abs: u32, rho: f64) -> f64 {
    if (n - m_abs) % 2 == 1 {
        return 0.0;
    }
    let half = (n - m_abs) / 2;
    let plus = (n + m_abs) / 2;
    (0..=half)
        .map(|k| {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            sign * factorial(n - k) / (factorial(k) * factorial(plus - k) * factorial(half - k))
                * rho.powi((n - 2 * k) as i32)
        })
        .sum()
}

/// Samples `Z_{n,m}` on `grid` with `ρ = r/radius`, zero where `ρ > 1`.
pub fn zernike_mode(
    n: u32,
    m: i32,
    grid: &Grid,
    radius: f64,
    include_m0: bool,
) -> Result<Array2<f64>, TurbulenceError> {
    let idx = ZernikeIndex::new(n, m)?;
    if m == 0 && !include_m0 {
        return Err(TurbulenceError::ExcludedMode { n, m });
    }
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(TurbulenceError::InvalidParameter(format!("normalization radius = {radius}")));
    }
    Ok(sample_mode(idx, grid, radius))
}

pub(crate) fn sample_mode(idx: ZernikeIndex, grid: &Grid, radius: f64) -> Array2<f64> {
    let ma = idx.m.unsigned_abs();
    Array2::from_shape_fn((grid.n(), grid.n()), |(iy, ix)| {
        let (r, phi) = grid.polar(iy, ix);
        let rho = r / radius;
        if rho > 1.0 {
            return 0.0;
        }
        let angular = match idx.m {
            0 => 1.0,
            m if m > 0 => (m as f64 * phi).cos(),
            _ => (ma as f64 * phi).sin(),
        };
        radial_unchecked(idx.n, ma, rho) * angular
    })
}
