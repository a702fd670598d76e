use std::f64::consts::PI;

use ndarray::Array2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::fft::Fft2;
use super::field::FieldGrid;
use super::grid::Grid;
use super::OpticsError;

/// Largest tolerated fraction of power in the outer `n/16` samples of the window.
pub const EDGE_POWER_TOL: f64 = 1e-7;

/// Smallest tolerated output beam radius, in samples.
const MIN_RADIUS_SAMPLES: f64 = 4.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PropagationMethod {
    /// One chirped transform; output pitch `λz/window`.
    SingleTransform,
    /// Fresnel transfer function in the angular-spectrum domain; grid unchanged.
    TransferFunction,
}

#[derive(Clone, Debug)]
pub struct Propagated {
    pub field: FieldGrid,
    pub method: PropagationMethod,
}

/// Fresnel propagation over distance `z`.
///
/// Uses the single-transform form when the chirp is resolved on the input grid
/// (`pitch ≤ λz/window`) and the transfer-function form otherwise. Power leaking into
/// the window border, on input or output, and an output beam narrower than a few
/// samples are reported as aliasing.
pub fn fresnel_propagate(f: &FieldGrid, z: f64) -> Result<Propagated, OpticsError> {
    if !(z > 0.0 && z.is_finite()) {
        return Err(OpticsError::InvalidParameter(format!("propagation distance z = {z}")));
    }
    let grid = f.grid;
    check_edges(f, "input field reaches the window border")?;
    let lambda = f.wavelength;
    let method = if grid.pitch() <= lambda * z / grid.window() {
        PropagationMethod::SingleTransform
    } else {
        PropagationMethod::TransferFunction
    };
    let field = match method {
        PropagationMethod::SingleTransform => single_transform(f, z)?,
        PropagationMethod::TransferFunction => transfer_function(f, z)?,
    };
    check_edges(&field, "propagated field wraps around the window")?;
    let radius = field.second_moment_radius() / field.grid.pitch();
    if radius < MIN_RADIUS_SAMPLES {
        return Err(OpticsError::Aliasing {
            reason: format!("output beam spans only {radius:.2} samples"),
            suggested_n: grid.n() * 2,
            suggested_window: grid.window() * 2.0,
        });
    }
    Ok(Propagated { field, method })
}

fn single_transform(f: &FieldGrid, z: f64) -> Result<FieldGrid, OpticsError> {
    let g = f.grid;
    let n = g.n();
    let lambda = f.wavelength;
    let k = 2.0 * PI / lambda;
    let dx = g.pitch();
    let out = Grid::new(n, lambda * z / dx)?;

    let mut work = Array2::from_shape_fn((n, n), |(iy, ix)| {
        let (x, y) = (g.coord(ix), g.coord(iy));
        f.amplitudes[[iy, ix]] * Complex64::from_polar(1.0, k * (x * x + y * y) / (2.0 * z))
    });
    Fft2::new(n).forward(&mut work);

    let prefactor = Complex64::from_polar(1.0, k * z) / Complex64::new(0.0, lambda * z) * (dx * dx);
    for ((iy, ix), v) in work.indexed_iter_mut() {
        let (x, y) = (out.coord(ix), out.coord(iy));
        *v *= prefactor * Complex64::from_polar(1.0, k * (x * x + y * y) / (2.0 * z));
    }
    FieldGrid::new(out, work, lambda, f.z + z)
}

fn transfer_function(f: &FieldGrid, z: f64) -> Result<FieldGrid, OpticsError> {
    let g = f.grid;
    let n = g.n();
    let lambda = f.wavelength;
    let fft = Fft2::new(n);
    let mut work = f.amplitudes.clone();
    fft.forward(&mut work);
    let df = 1.0 / g.window();
    let carrier = Complex64::from_polar(1.0, 2.0 * PI * z / lambda);
    let c = (n / 2) as f64;
    for ((iy, ix), v) in work.indexed_iter_mut() {
        let fx = (ix as f64 - c) * df;
        let fy = (iy as f64 - c) * df;
        *v *= carrier * Complex64::from_polar(1.0, -PI * lambda * z * (fx * fx + fy * fy));
    }
    fft.inverse(&mut work);
    FieldGrid::new(g, work, lambda, f.z + z)
}

fn edge_fraction(f: &FieldGrid) -> f64 {
    let n = f.grid.n();
    let band = n / 16;
    let mut edge = 0.0;
    let mut total = 0.0;
    for ((iy, ix), v) in f.amplitudes.indexed_iter() {
        let p = v.norm_sqr();
        total += p;
        if iy.min(ix).min(n - 1 - iy).min(n - 1 - ix) < band {
            edge += p;
        }
    }
    edge / total
}

fn check_edges(f: &FieldGrid, reason: &str) -> Result<(), OpticsError> {
    let frac = edge_fraction(f);
    if frac > EDGE_POWER_TOL {
        return Err(OpticsError::Aliasing {
            reason: format!("{reason} (border power fraction {frac:.2e})"),
            suggested_n: f.grid.n() * 2,
            suggested_window: f.grid.window() * 2.0,
        });
    }
    Ok(())
}
