use serde::{Deserialize, Serialize};

use super::OpticsError;

/// Square sampling grid centred on the optical axis.
///
/// Sample `(iy, ix)` sits at `x = (ix − n/2)·pitch`, `y = (iy − n/2)·pitch`, so the axis
/// falls exactly on sample `(n/2, n/2)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    n: usize,
    window: f64,
}

impl Grid {
    pub const MIN_SAMPLES: usize = 64;

    pub fn new(n: usize, window: f64) -> Result<Self, OpticsError> {
        if n < Self::MIN_SAMPLES || !n.is_power_of_two() {
            return Err(OpticsError::InvalidGrid(format!(
                "n = {n}: need a power of two >= {}",
                Self::MIN_SAMPLES
            )));
        }
        if !(window.is_finite() && window > 0.0) {
            return Err(OpticsError::InvalidGrid(format!("window = {window}: must be positive")));
        }
        Ok(Self { n, window })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Physical side length in meters.
    pub fn window(&self) -> f64 {
        self.window
    }

    pub fn pitch(&self) -> f64 {
        self.window / self.n as f64
    }

    pub fn coord(&self, i: usize) -> f64 {
        (i as f64 - (self.n / 2) as f64) * self.pitch()
    }

    /// Polar coordinates `(r, φ)` of sample `(iy, ix)`.
    pub fn polar(&self, iy: usize, ix: usize) -> (f64, f64) {
        let x = self.coord(ix);
        let y = self.coord(iy);
        (x.hypot(y), y.atan2(x))
    }

    /// Largest radius reached on the grid (the corner sample).
    pub fn max_radius(&self) -> f64 {
        self.coord(0).abs() * std::f64::consts::SQRT_2
    }

    pub fn same_as(&self, other: &Grid) -> bool {
        self.n == other.n && (self.window - other.window).abs() <= 1e-12 * self.window
    }
}
