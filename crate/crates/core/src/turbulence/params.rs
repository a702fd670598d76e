use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::TurbulenceError;
use crate::optics::Grid;

/// Fried parameter `r0 = 1.68·(C_n²·L·k²)^{−3/5}`, `k = 2π/λ`.
///
/// `cn2 = 0` is accepted and gives `r0 = ∞`.
pub fn fried_parameter(cn2: f64, length: f64, wavelength: f64) -> Result<f64, TurbulenceError> {
    if !(cn2 >= 0.0 && cn2.is_finite()) {
        return Err(TurbulenceError::InvalidParameter(format!("cn2 = {cn2}")));
    }
    if !(length > 0.0 && length.is_finite()) {
        return Err(TurbulenceError::InvalidParameter(format!("length = {length}")));
    }
    if !(wavelength > 0.0 && wavelength.is_finite()) {
        return Err(TurbulenceError::InvalidParameter(format!("wavelength = {wavelength}")));
    }
    if cn2 == 0.0 {
        return Ok(f64::INFINITY);
    }
    let k = 2.0 * PI / wavelength;
    Ok(1.68 * (cn2 * length * k * k).powf(-0.6))
}

/// Radius that maps to `ρ = 1` for the Zernike expansion.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RadiusNormalization {
    /// `ρ = r/(D/2)`, screen zero outside the aperture.
    #[default]
    Aperture,
    /// `ρ = r/r_max` with `r_max` the largest radius on the grid; no aperture cut.
    Window,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TurbulenceParams {
    /// Refractive-index structure constant, m^{−2/3}.
    pub cn2: f64,
    /// Channel length, m.
    pub length: f64,
    /// Wavelength, m.
    pub wavelength: f64,
    /// Receiver aperture diameter, m.
    pub aperture: f64,
    /// Highest Zernike radial order included.
    pub max_order: u32,
    #[serde(default)]
    pub include_m0: bool,
    #[serde(default)]
    pub normalization: RadiusNormalization,
}

impl TurbulenceParams {
    pub fn validate(&self) -> Result<(), TurbulenceError> {
        fried_parameter(self.cn2, self.length, self.wavelength)?;
        if !(self.aperture > 0.0 && self.aperture.is_finite()) {
            return Err(TurbulenceError::InvalidParameter(format!("aperture = {}", self.aperture)));
        }
        if self.max_order < 1 {
            return Err(TurbulenceError::InvalidParameter("max_order must be >= 1".into()));
        }
        Ok(())
    }

    pub fn r0(&self) -> Result<f64, TurbulenceError> {
        fried_parameter(self.cn2, self.length, self.wavelength)
    }

    /// Radius mapped to `ρ = 1` on `grid`.
    pub fn norm_radius(&self, grid: &Grid) -> f64 {
        match self.normalization {
            RadiusNormalization::Aperture => self.aperture / 2.0,
            RadiusNormalization::Window => grid.max_radius(),
        }
    }

    /// Diameter entering the `(D/r0)^{5/3}` scaling.
    pub fn effective_diameter(&self, grid: &Grid) -> f64 {
        2.0 * self.norm_radius(grid)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // Reference values evaluated at 30 significant digits.
    const CASES: [(f64, f64, f64); 4] = [
        (1e-14, 1000.0, 0.0268644461709278642),
        (1e-14, 10.0, 0.42577277855541598712),
        (1e-13, 1000.0, 0.00674804378267731962),
        (1.9952623149688795e-15, 1000.0, 0.0706606928833880153),
    ];

    #[test]
    fn matches_high_precision_reference() {
        for (cn2, l, expected) in CASES {
            let r0 = fried_parameter(cn2, l, 633e-9).unwrap();
            assert!((r0 / expected - 1.0).abs() < 1e-11, "{cn2} {l}: {r0} vs {expected}");
        }
    }

    #[test]
    fn log_form_agrees() {
        let (cn2, l, lambda): (f64, f64, f64) = (3.7e-15, 2500.0, 1550e-9);
        let k = 2.0 * PI / lambda;
        let via_logs = (1.68f64.ln() - 0.6 * (cn2.ln() + l.ln() + 2.0 * k.ln())).exp();
        let r0 = fried_parameter(cn2, l, lambda).unwrap();
        assert!((r0 / via_logs - 1.0).abs() < 1e-12);
    }

    #[test]
    fn doubling_length_scales_by_power_law() {
        let a = fried_parameter(1e-14, 700.0, 633e-9).unwrap();
        let b = fried_parameter(1e-14, 1400.0, 633e-9).unwrap();
        assert!((b / a - 2f64.powf(-0.6)).abs() < 1e-14);
    }

    #[test]
    fn zero_turbulence_and_bad_inputs() {
        assert_eq!(fried_parameter(0.0, 1000.0, 633e-9).unwrap(), f64::INFINITY);
        assert!(fried_parameter(-1e-14, 1000.0, 633e-9).is_err());
        assert!(fried_parameter(1e-14, 0.0, 633e-9).is_err());
        assert!(fried_parameter(1e-14, 1000.0, 0.0).is_err());
    }
}
