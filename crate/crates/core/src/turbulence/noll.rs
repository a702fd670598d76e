use statrs::function::gamma::gamma;

use super::zernike::ZernikeIndex;
use super::TurbulenceError;

/// `A·8π^{8/3}Γ(14/3)/2^{14/3}` with `A = 0.0228955871…` the Kolmogorov phase-spectrum
/// constant in `Φ(κ) = A r0^{−5/3} κ^{−11/3}`.
pub const KOLMOGOROV_NOLL_CONSTANT: f64 = 2.246064708090834064920085;

/// Variance of a unit-RMS Zernike coefficient of radial order `n` in units of
/// `(D/r0)^{5/3}`.
pub fn noll_gamma(n: u32) -> Result<f64, TurbulenceError> {
    if n == 0 {
        return Err(TurbulenceError::Piston);
    }
    let nf = n as f64;
    Ok(KOLMOGOROV_NOLL_CONSTANT * (nf + 1.0) * gamma(nf - 5.0 / 6.0)
        / (gamma(17.0 / 6.0).powi(2) * gamma(nf + 23.0 / 6.0)))
}

/// Variance of the coefficient of the unnormalized mode `Z_{n,m}`:
/// `ν·γ(n)·(D/r0)^{5/3}` with `ν = 2(n+1)` for `m ≠ 0` and `n+1` for `m = 0`.
pub fn noll_variance(n: u32, m: i32, aperture: f64, r0: f64) -> Result<f64, TurbulenceError> {
    ZernikeIndex::new(n, m)?;
    if !(aperture > 0.0 && aperture.is_finite()) {
        return Err(TurbulenceError::InvalidParameter(format!("aperture = {aperture}")));
    }
    if !(r0 > 0.0) {
        return Err(TurbulenceError::InvalidParameter(format!("r0 = {r0}")));
    }
    let norm_sq = if m == 0 { (n + 1) as f64 } else { 2.0 * (n + 1) as f64 };
    Ok(norm_sq * noll_gamma(n)? * (aperture / r0).powf(5.0 / 3.0))
}
