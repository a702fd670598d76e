//! Kolmogorov turbulence as a single Zernike phase screen.
//!
//! Zernike modes are unnormalized, `Z_{n,m} = R_n^{|m|}(ρ)·cos(mφ)` for `m > 0` and
//! `R_n^{|m|}(ρ)·sin(|m|φ)` for `m < 0`. Coefficient variances are scaled to match the
//! unit-RMS Noll statistics, so screens carry Kolmogorov phase power whatever the
//! normalization.

mod noll;
mod params;
mod screen;
mod zernike;

pub use noll::{noll_gamma, noll_variance, KOLMOGOROV_NOLL_CONSTANT};
pub use params::{fried_parameter, RadiusNormalization, TurbulenceParams};
pub use screen::{
    ao_correct, apply_screen, sample_phase_screen, PhaseDump, PhaseScreen, ScreenDocument, ZernikeBasis,
    ZernikeCoeff,
};
pub use zernike::{mode_indices, zernike_mode, zernike_radial, ZernikeIndex};

use thiserror::Error;

use crate::optics::OpticsError;

#[derive(Debug, Error)]
pub enum TurbulenceError {
    #[error("invalid turbulence parameter: {0}")]
    InvalidParameter(String),
    #[error("invalid Zernike index (n = {n}, m = {m}): need n >= |m| and n - |m| even")]
    InvalidIndex { n: u32, m: i32 },
    #[error("Zernike mode (n = {n}, m = 0) excluded: m = 0 terms need the include-m0 option")]
    ExcludedMode { n: u32, m: i32 },
    #[error("piston (n = 0) is never generated")]
    Piston,
    #[error("normalized radius {0} outside [0, 1]")]
    Domain(f64),
    #[error("screen and field live on different grids")]
    GridMismatch,
    #[error(transparent)]
    Optics(#[from] OpticsError),
}
