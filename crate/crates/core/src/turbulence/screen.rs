use std::sync::Arc;

use ndarray::Array2;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::noll::noll_variance;
use super::params::{RadiusNormalization, TurbulenceParams};
use super::zernike::{mode_indices, sample_mode, ZernikeIndex};
use super::TurbulenceError;
use crate::optics::{FieldGrid, Grid};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZernikeCoeff {
    pub n: u32,
    pub m: i32,
    pub c: f64,
}

/// Zernike modes sampled once on a grid; every screen drawn from it shares the arrays.
#[derive(Debug)]
pub struct ZernikeBasis {
    grid: Grid,
    radius: f64,
    normalization: RadiusNormalization,
    modes: Vec<ZernikeIndex>,
    arrays: Vec<Array2<f64>>,
}

impl ZernikeBasis {
    pub fn new(params: &TurbulenceParams, grid: &Grid) -> Result<Arc<Self>, TurbulenceError> {
        params.validate()?;
        let radius = params.norm_radius(grid);
        let modes = mode_indices(params.max_order, params.include_m0);
        let arrays = modes.iter().map(|&idx| sample_mode(idx, grid, radius)).collect();
        Ok(Arc::new(Self {
            grid: *grid,
            radius,
            normalization: params.normalization,
            modes,
            arrays,
        }))
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn diameter(&self) -> f64 {
        2.0 * self.radius
    }

    pub fn normalization(&self) -> RadiusNormalization {
        self.normalization
    }

    pub fn modes(&self) -> &[ZernikeIndex] {
        &self.modes
    }

    pub fn mode_array(&self, idx: ZernikeIndex) -> Option<&Array2<f64>> {
        self.modes.iter().position(|&m| m == idx).map(|i| &self.arrays[i])
    }

    /// Per-mode standard deviations for Fried parameter `r0`.
    pub fn sigmas(&self, r0: f64) -> Result<Vec<f64>, TurbulenceError> {
        self.modes
            .iter()
            .map(|idx| noll_variance(idx.n, idx.m, self.diameter(), r0).map(f64::sqrt))
            .collect()
    }

    /// Draws one standard normal per mode and scales it. The stream advances by the same
    /// amount whatever the sigmas, so zero-turbulence runs consume identical draws.
    pub fn draw_coefficients<R: Rng + ?Sized>(&self, sigmas: &[f64], rng: &mut R) -> Vec<ZernikeCoeff> {
        self.modes
            .iter()
            .zip(sigmas)
            .map(|(idx, &s)| {
                let z: f64 = rng.sample(StandardNormal);
                ZernikeCoeff {
                    n: idx.n,
                    m: idx.m,
                    c: s * z,
                }
            })
            .collect()
    }

    /// `Σ c·Z` over `coeffs`, summed in list order.
    pub fn assemble(&self, coeffs: &[ZernikeCoeff]) -> Result<Array2<f64>, TurbulenceError> {
        let mut phase = Array2::zeros((self.grid.n(), self.grid.n()));
        for k in coeffs {
            let arr = self
                .mode_array(ZernikeIndex { n: k.n, m: k.m })
                .ok_or(TurbulenceError::InvalidIndex { n: k.n, m: k.m })?;
            if k.c != 0.0 {
                phase.scaled_add(k.c, arr);
            }
        }
        Ok(phase)
    }

    pub fn screen(self: &Arc<Self>, coeffs: Vec<ZernikeCoeff>) -> Result<PhaseScreen, TurbulenceError> {
        let phase = self.assemble(&coeffs)?;
        Ok(PhaseScreen {
            phase,
            coeffs,
            basis: Arc::clone(self),
        })
    }

    pub fn sample<R: Rng + ?Sized>(self: &Arc<Self>, r0: f64, rng: &mut R) -> Result<PhaseScreen, TurbulenceError> {
        let sigmas = self.sigmas(r0)?;
        let coeffs = self.draw_coefficients(&sigmas, rng);
        self.screen(coeffs)
    }
}

/// A real phase `ξ(x, y)` in radians together with the Zernike terms that built it.
#[derive(Clone, Debug)]
pub struct PhaseScreen {
    phase: Array2<f64>,
    coeffs: Vec<ZernikeCoeff>,
    basis: Arc<ZernikeBasis>,
}

impl PhaseScreen {
    pub fn grid(&self) -> &Grid {
        &self.basis.grid
    }

    pub fn phase(&self) -> &Array2<f64> {
        &self.phase
    }

    pub fn coeffs(&self) -> &[ZernikeCoeff] {
        &self.coeffs
    }

    pub fn basis(&self) -> &Arc<ZernikeBasis> {
        &self.basis
    }

    /// `e^{iξ}` sampled on the grid.
    pub fn transmission(&self) -> Array2<Complex64> {
        self.phase.mapv(|p| Complex64::from_polar(1.0, p))
    }

    pub fn to_document(&self, r0: f64) -> ScreenDocument {
        ScreenDocument {
            r0,
            radius: self.basis.radius,
            normalization: self.basis.normalization,
            coeffs: self.coeffs.clone(),
        }
    }

    pub fn dump(&self, stride: usize) -> PhaseDump {
        let stride = stride.max(1);
        let idx: Vec<usize> = (0..self.grid().n()).step_by(stride).collect();
        PhaseDump {
            n: idx.len(),
            stride,
            pitch: self.grid().pitch() * stride as f64,
            window: self.grid().window(),
            phase: idx.iter().map(|&iy| idx.iter().map(|&ix| self.phase[[iy, ix]]).collect()).collect(),
        }
    }
}

/// Coefficient listing of a screen.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ScreenDocument {
    pub r0: f64,
    pub radius: f64,
    pub normalization: RadiusNormalization,
    pub coeffs: Vec<ZernikeCoeff>,
}

/// Decimated phase samples, rows along `y`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PhaseDump {
    pub n: usize,
    pub stride: usize,
    pub pitch: f64,
    pub window: f64,
    pub phase: Vec<Vec<f64>>,
}

pub fn sample_phase_screen<R: Rng + ?Sized>(
    params: &TurbulenceParams,
    grid: &Grid,
    rng: &mut R,
) -> Result<PhaseScreen, TurbulenceError> {
    let basis = ZernikeBasis::new(params, grid)?;
    basis.sample(params.r0()?, rng)
}

/// Pointwise `E·e^{iξ}`.
pub fn apply_screen(f: &FieldGrid, s: &PhaseScreen) -> Result<FieldGrid, TurbulenceError> {
    if !f.grid.same_as(s.grid()) {
        return Err(TurbulenceError::GridMismatch);
    }
    let mut out = f.clone();
    ndarray::Zip::from(&mut out.amplitudes)
        .and(&s.phase)
        .for_each(|a, &p| *a *= Complex64::from_polar(1.0, p));
    Ok(out)
}

/// Removes every term of radial order `n ≤ corrected_orders`.
pub fn ao_correct(s: &PhaseScreen, corrected_orders: u32) -> PhaseScreen {
    let coeffs: Vec<ZernikeCoeff> = s.coeffs.iter().copied().filter(|k| k.n > corrected_orders).collect();
    if coeffs.len() == s.coeffs.len() {
        return s.clone();
    }
    s.basis.screen(coeffs).expect("terms come from the same basis")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optics::{lg_field, Fft2};
    use crate::turbulence::{noll_gamma, zernike_mode};
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;
    use std::f64::consts::PI;

    fn params(cn2: f64) -> TurbulenceParams {
        TurbulenceParams {
            cn2,
            length: 1000.0,
            wavelength: 633e-9,
            aperture: 0.009,
            max_order: 7,
            include_m0: false,
            normalization: RadiusNormalization::Aperture,
        }
    }

    fn grid() -> Grid {
        Grid::new(64, 0.01).unwrap()
    }

    #[test]
    fn zero_turbulence_gives_zero_screen() {
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        let s = sample_phase_screen(&params(0.0), &grid(), &mut rng).unwrap();
        assert!(s.phase().iter().all(|&p| p == 0.0));
        assert!(s.coeffs().iter().all(|k| k.c == 0.0));
    }

    #[test]
    fn same_seed_same_screen() {
        let a = sample_phase_screen(&params(1e-14), &grid(), &mut ChaCha20Rng::seed_from_u64(9)).unwrap();
        let b = sample_phase_screen(&params(1e-14), &grid(), &mut ChaCha20Rng::seed_from_u64(9)).unwrap();
        assert_eq!(a.phase(), b.phase());
        let c = sample_phase_screen(&params(1e-14), &grid(), &mut ChaCha20Rng::seed_from_u64(10)).unwrap();
        assert_ne!(a.phase(), c.phase());
    }

    #[test]
    fn phase_reconstructs_from_coefficients() {
        let p = params(2e-14);
        let g = grid();
        let s = sample_phase_screen(&p, &g, &mut ChaCha20Rng::seed_from_u64(3)).unwrap();
        let mut rebuilt = Array2::<f64>::zeros((64, 64));
        for k in s.coeffs() {
            rebuilt += &(zernike_mode(k.n, k.m, &g, p.aperture / 2.0, false).unwrap() * k.c);
        }
        for (a, b) in rebuilt.iter().zip(s.phase()) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn coefficient_variances_match_noll() {
        let p = params(1e-14);
        let g = grid();
        let basis = ZernikeBasis::new(&p, &g).unwrap();
        let sigmas = basis.sigmas(p.r0().unwrap()).unwrap();
        let draws = 100_000;
        let mut rng = ChaCha20Rng::seed_from_u64(2024);
        let mut acc = vec![0.0; sigmas.len()];
        for _ in 0..draws {
            for (a, k) in acc.iter_mut().zip(basis.draw_coefficients(&sigmas, &mut rng)) {
                *a += k.c * k.c;
            }
        }
        for ((a, s), idx) in acc.iter().zip(&sigmas).zip(basis.modes()) {
            let var = a / draws as f64;
            let expected = noll_variance(idx.n, idx.m, p.aperture, p.r0().unwrap()).unwrap();
            assert!((s * s / expected - 1.0).abs() < 1e-12);
            assert!((var / expected - 1.0).abs() < 0.05, "{idx}: {var} vs {expected}");
        }
    }

    #[test]
    fn ao_edge_cases_and_idempotence() {
        let s = sample_phase_screen(&params(1e-14), &grid(), &mut ChaCha20Rng::seed_from_u64(5)).unwrap();
        assert_eq!(ao_correct(&s, 0).phase(), s.phase());
        let gone = ao_correct(&s, 7);
        assert!(gone.phase().iter().all(|&p| p == 0.0));
        assert!(gone.coeffs().is_empty());
        let once = ao_correct(&s, 3);
        let twice = ao_correct(&once, 3);
        assert_eq!(once.phase(), twice.phase());
        assert_eq!(once.coeffs(), twice.coeffs());
        assert!(once.coeffs().iter().all(|k| k.n > 3));
    }

    #[test]
    fn ao_residual_variance_matches_uncorrected_terms() {
        let p = params(1e-14);
        let g = grid();
        let basis = ZernikeBasis::new(&p, &g).unwrap();
        let r0 = p.r0().unwrap();
        let diameter = p.aperture;
        let sigmas = basis.sigmas(r0).unwrap();
        let disk: Vec<(usize, usize)> = (0..64)
            .flat_map(|iy| (0..64).map(move |ix| (iy, ix)))
            .filter(|&(iy, ix)| g.polar(iy, ix).0 <= diameter / 2.0)
            .collect();
        let screens = 10_000;
        let mut rng = ChaCha20Rng::seed_from_u64(77);
        let orders = [0u32, 2, 4, 6];
        let mut coeff_var = [0.0; 4];
        let mut spatial_var = [0.0; 4];
        for _ in 0..screens {
            let s = basis.screen(basis.draw_coefficients(&sigmas, &mut rng)).unwrap();
            let mut last = f64::INFINITY;
            for (slot, &order) in orders.iter().enumerate() {
                let r = ao_correct(&s, order);
                let cv: f64 = r.coeffs().iter().map(|k| k.c * k.c).sum();
                assert!(cv <= last);
                last = cv;
                coeff_var[slot] += cv;
                spatial_var[slot] +=
                    disk.iter().map(|&(iy, ix)| r.phase()[[iy, ix]].powi(2)).sum::<f64>() / disk.len() as f64;
            }
        }
        for (slot, &order) in orders.iter().enumerate() {
            let uncorrected: Vec<_> = basis.modes().iter().filter(|idx| idx.n > order).collect();
            let expected_coeff: f64 =
                uncorrected.iter().map(|idx| noll_variance(idx.n, idx.m, diameter, r0).unwrap()).sum();
            // Disk mean of (R cos mφ)² is 1/(2(n+1)), which turns each term back into γ(n)(D/r0)^{5/3}.
            let expected_spatial: f64 = uncorrected
                .iter()
                .map(|idx| noll_gamma(idx.n).unwrap() * (diameter / r0).powf(5.0 / 3.0))
                .sum();
            let cv = coeff_var[slot] / screens as f64;
            let sv = spatial_var[slot] / screens as f64;
            assert!((cv / expected_coeff - 1.0).abs() < 0.05, "order {order}: {cv} vs {expected_coeff}");
            assert!((sv / expected_spatial - 1.0).abs() < 0.05, "order {order}: {sv} vs {expected_spatial}");
        }
    }

    #[test]
    fn apply_preserves_power_and_rejects_mismatch() {
        let g = Grid::new(128, 0.01).unwrap();
        let p = params(1e-13);
        let s = sample_phase_screen(&p, &g, &mut ChaCha20Rng::seed_from_u64(4)).unwrap();
        let f = lg_field(2, 1e-3, 633e-9, &g).unwrap();
        let out = apply_screen(&f, &s).unwrap();
        assert!((out.power() - f.power()).abs() < 1e-13);
        let zero = sample_phase_screen(&params(0.0), &g, &mut ChaCha20Rng::seed_from_u64(4)).unwrap();
        assert_eq!(apply_screen(&f, &zero).unwrap().amplitudes, f.amplitudes);
        let other = lg_field(2, 1e-3, 633e-9, &Grid::new(64, 0.01).unwrap()).unwrap();
        assert!(matches!(apply_screen(&other, &s), Err(TurbulenceError::GridMismatch)));
        let aberrated = crate::optics::overlap(&f, &out).unwrap().norm();
        assert!(aberrated < 1.0);
    }

    #[test]
    fn tilt_shifts_far_field_centroid() {
        // e^{i c x/R} moves the spectrum by c/(2πR) cycles per meter, i.e. c·W/(2πR) bins.
        let n = 128;
        let g = Grid::new(n, 0.016).unwrap();
        let p = TurbulenceParams {
            normalization: RadiusNormalization::Window,
            max_order: 1,
            ..params(1e-14)
        };
        let basis = ZernikeBasis::new(&p, &g).unwrap();
        let field = lg_field(0, g.window() / 16.0, 633e-9, &g).unwrap();
        let fft = Fft2::new(n);
        let centroid = |c: f64| {
            let s = basis.screen(vec![ZernikeCoeff { n: 1, m: 1, c }]).unwrap();
            let mut spectrum = apply_screen(&field, &s).unwrap().amplitudes;
            fft.forward(&mut spectrum);
            let (mut sx, mut sy, mut tot) = (0.0, 0.0, 0.0);
            for ((qy, qx), v) in spectrum.indexed_iter() {
                let w = v.norm_sqr();
                tot += w;
                sx += w * (qx as f64 - (n / 2) as f64);
                sy += w * (qy as f64 - (n / 2) as f64);
            }
            (sx / tot, sy / tot)
        };
        let (x0, _) = centroid(0.0);
        assert!(x0.abs() < 1e-9);
        for c in [1.3, 5.0, -12.0] {
            let (x, y) = centroid(c);
            let expected = c * g.window() / (2.0 * PI * basis.radius());
            assert!((x - expected).abs() < 1e-6, "c={c}: {x} vs {expected}");
            assert!(y.abs() < 1e-9);
        }
    }

    #[test]
    fn documents_serialize() {
        let s = sample_phase_screen(&params(1e-14), &grid(), &mut ChaCha20Rng::seed_from_u64(6)).unwrap();
        let doc = s.to_document(0.03);
        let json = serde_json::to_string(&doc).unwrap();
        let back: ScreenDocument = serde_json::from_str(&json).unwrap();
        assert_eq!(back.coeffs, s.coeffs());
        let dump = s.dump(8);
        assert_eq!(dump.n, 8);
        assert_eq!(dump.phase[4][4], s.phase()[[32, 32]]);
    }
}
