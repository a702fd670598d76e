use ndarray::{Array2, Zip};
use num_complex::Complex64;
use rayon::prelude::*;

use super::grid::Grid;
use super::OpticsError;
use crate::hilbert::{BasisVector, OamIndexMap};

/// A sampled complex transverse field.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldGrid {
    pub grid: Grid,
    /// Indexed `[[iy, ix]]`.
    pub amplitudes: Array2<Complex64>,
    /// Wavelength in meters.
    pub wavelength: f64,
    /// Plane of the field along the propagation axis, meters.
    pub z: f64,
}

impl FieldGrid {
    pub fn new(grid: Grid, amplitudes: Array2<Complex64>, wavelength: f64, z: f64) -> Result<Self, OpticsError> {
        if amplitudes.dim() != (grid.n(), grid.n()) {
            return Err(OpticsError::ShapeMismatch {
                expected: grid.n(),
                found: amplitudes.nrows(),
            });
        }
        if !(wavelength > 0.0) {
            return Err(OpticsError::InvalidParameter(format!("wavelength = {wavelength}")));
        }
        Ok(Self {
            grid,
            amplitudes,
            wavelength,
            z,
        })
    }

    /// `Σ |E|² · pitch²`.
    pub fn power(&self) -> f64 {
        let p = self.grid.pitch();
        self.amplitudes.iter().map(|c| c.norm_sqr()).sum::<f64>() * p * p
    }

    /// Rescaled to unit power.
    pub fn normalized(mut self) -> Result<Self, OpticsError> {
        let power = self.power();
        if !(power.is_finite() && power > 0.0) {
            return Err(OpticsError::ZeroField);
        }
        let scale = 1.0 / power.sqrt();
        self.amplitudes.mapv_inplace(|c| c * scale);
        Ok(self)
    }

    /// Beam radius `sqrt(2 <r²>)` about the intensity centroid; equals `w` for a Gaussian
    /// `exp(−2r²/w²)` intensity profile.
    pub fn second_moment_radius(&self) -> f64 {
        let (cx, cy) = self.centroid();
        let n = self.grid.n();
        let mut total = 0.0;
        let mut moment = 0.0;
        for iy in 0..n {
            let y = self.grid.coord(iy) - cy;
            for ix in 0..n {
                let x = self.grid.coord(ix) - cx;
                let w = self.amplitudes[[iy, ix]].norm_sqr();
                total += w;
                moment += w * (x * x + y * y);
            }
        }
        (2.0 * moment / total).sqrt()
    }

    /// Intensity-weighted mean position `(x, y)`.
    pub fn centroid(&self) -> (f64, f64) {
        let n = self.grid.n();
        let mut total = 0.0;
        let (mut sx, mut sy) = (0.0, 0.0);
        for iy in 0..n {
            let y = self.grid.coord(iy);
            for ix in 0..n {
                let w = self.amplitudes[[iy, ix]].norm_sqr();
                total += w;
                sx += w * self.grid.coord(ix);
                sy += w * y;
            }
        }
        (sx / total, sy / total)
    }

    fn check_compatible(&self, other: &FieldGrid) -> Result<(), OpticsError> {
        if !self.grid.same_as(&other.grid) {
            return Err(OpticsError::GridMismatch);
        }
        if (self.wavelength - other.wavelength).abs() > 1e-12 * self.wavelength {
            return Err(OpticsError::WavelengthMismatch);
        }
        Ok(())
    }
}

/// What to do when a requested beam is too wide for the sampling window.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum AliasPolicy {
    #[default]
    Error,
    Warn,
}

/// Power-normalized `LG_{ℓ,0}` field `∝ (r/w0)^{|ℓ|} e^{iℓφ} e^{−(r/w0)²}`.
pub fn lg_field(ell: i32, w0: f64, wavelength: f64, grid: &Grid) -> Result<FieldGrid, OpticsError> {
    lg_field_with_policy(ell, w0, wavelength, grid, AliasPolicy::Error)
}

pub fn lg_field_with_policy(
    ell: i32,
    w0: f64,
    wavelength: f64,
    grid: &Grid,
    policy: AliasPolicy,
) -> Result<FieldGrid, OpticsError> {
    if !(w0 > 0.0 && w0.is_finite()) {
        return Err(OpticsError::InvalidParameter(format!("w0 = {w0}")));
    }
    if w0 > grid.window() / 4.0 {
        match policy {
            AliasPolicy::Error => {
                return Err(OpticsError::Aliasing {
                    reason: format!("beam waist {w0} m exceeds window/4 = {} m", grid.window() / 4.0),
                    suggested_n: grid.n(),
                    suggested_window: 8.0 * w0,
                })
            }
            AliasPolicy::Warn => log::warn!("beam waist {w0} m exceeds a quarter of the {} m window", grid.window()),
        }
    }
    let n = grid.n();
    let order = ell.unsigned_abs() as i32;
    let amplitudes = Array2::from_shape_fn((n, n), |(iy, ix)| {
        let (r, phi) = grid.polar(iy, ix);
        let rho = r / w0;
        Complex64::from_polar(rho.powi(order) * (-rho * rho).exp(), ell as f64 * phi)
    });
    FieldGrid::new(*grid, amplitudes, wavelength, 0.0)?.normalized()
}

/// Discretized `∬ conj(a)·b dx dy`.
pub fn overlap(a: &FieldGrid, b: &FieldGrid) -> Result<Complex64, OpticsError> {
    a.check_compatible(b)?;
    let p = a.grid.pitch();
    Ok(raw_overlap(&a.amplitudes, &b.amplitudes) * (p * p))
}

pub(crate) fn raw_overlap(a: &Array2<Complex64>, b: &Array2<Complex64>) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    Zip::from(a).and(b).for_each(|x, y| acc += x.conj() * y);
    acc
}

/// LG carriers for one set of charges, sampled once and reused for synthesis.
#[derive(Clone, Debug)]
pub struct LgBank {
    ells: Vec<i32>,
    fields: Vec<FieldGrid>,
    w0: f64,
}

impl LgBank {
    pub fn new(ells: &[i32], w0: f64, wavelength: f64, grid: &Grid) -> Result<Self, OpticsError> {
        let fields = ells
            .par_iter()
            .map(|&ell| lg_field(ell, w0, wavelength, grid))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self {
            ells: ells.to_vec(),
            fields,
            w0,
        })
    }

    pub fn for_map(map: &OamIndexMap, w0: f64, wavelength: f64, grid: &Grid) -> Result<Self, OpticsError> {
        Self::new(map.ells(), w0, wavelength, grid)
    }

    pub fn ells(&self) -> &[i32] {
        &self.ells
    }

    pub fn fields(&self) -> &[FieldGrid] {
        &self.fields
    }

    pub fn w0(&self) -> f64 {
        self.w0
    }

    pub fn field(&self, ell: i32) -> Option<&FieldGrid> {
        self.ells.iter().position(|&l| l == ell).map(|i| &self.fields[i])
    }

    /// `Σ_j coeffs[j]·LG_{ells[j]}` without renormalization.
    pub fn synthesize_raw(&self, coeffs: &[Complex64], map: &OamIndexMap) -> Result<FieldGrid, OpticsError> {
        if coeffs.len() != map.dim() {
            return Err(OpticsError::DimensionMismatch {
                expected: map.dim(),
                found: coeffs.len(),
            });
        }
        let first = self.fields.first().ok_or(OpticsError::ZeroField)?;
        let mut acc = Array2::<Complex64>::zeros(first.amplitudes.dim());
        for (&c, &ell) in coeffs.iter().zip(map.ells()) {
            let carrier = self.field(ell).ok_or(OpticsError::MissingCarrier(ell))?;
            if c != Complex64::new(0.0, 0.0) {
                acc.scaled_add(c, &carrier.amplitudes);
            }
        }
        FieldGrid::new(first.grid, acc, first.wavelength, first.z)
    }

    pub fn synthesize(&self, vec: &BasisVector, map: &OamIndexMap) -> Result<FieldGrid, OpticsError> {
        self.synthesize_raw(vec.coeffs(), map)?.normalized()
    }

    /// Gram matrix of the carriers on the grid, `G[j][k] = <LG_j|LG_k>`.
    pub fn gram(&self) -> Vec<Vec<Complex64>> {
        self.fields
            .iter()
            .map(|a| self.fields.iter().map(|b| overlap(a, b).expect("same grid")).collect())
            .collect()
    }
}

/// `Σ_j vec[j]·LG_{ℓ_j}` renormalized to unit power.
pub fn synthesize(
    vec: &BasisVector,
    map: &OamIndexMap,
    w0: f64,
    wavelength: f64,
    grid: &Grid,
) -> Result<FieldGrid, OpticsError> {
    if vec.dim() != map.dim() {
        return Err(OpticsError::DimensionMismatch {
            expected: map.dim(),
            found: vec.dim(),
        });
    }
    LgBank::for_map(map, w0, wavelength, grid)?.synthesize(vec, map)
}
