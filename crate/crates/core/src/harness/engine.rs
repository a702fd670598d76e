//! Per-realization channel evaluation by modal projection.
//!
//! Every sent and detected state is a superposition of the same few LG carriers, so one
//! carrier-space operator `M_jk = ⟨LG_j|e^{iξ}|LG_k⟩` per screen gives every projection:
//! `|⟨t|e^{iξ}|s⟩|² = |t†·M·s|² / (‖t‖²‖s‖²)` with grid norms `‖s‖² = s†·G·s`.
//! At the screen plane the sums run over the pixels where the carriers carry power; at
//! `z > 0` the aberrated carriers are propagated and projected on the propagated carriers.

use std::sync::Arc;

use ndarray::Array2;
use num_complex::Complex64;

use super::HarnessError;
use crate::hilbert::{ModeBasis, OamIndexMap};
use crate::optics::{fresnel_propagate, overlap, FieldGrid, Grid, LgBank, PropagationMethod};
use crate::turbulence::ZernikeBasis;

/// Carrier power allowed outside the pixel support, summed over carriers.
const SUPPORT_TOL: f64 = 1e-15;

#[derive(Debug)]
enum Path {
    ScreenPlane {
        pixels: Vec<usize>,
        /// Carriers × pixels.
        carriers: Array2<Complex64>,
        /// Zernike modes × pixels.
        modes: Array2<f64>,
    },
    Propagated {
        z: f64,
        carriers: Vec<FieldGrid>,
        method: PropagationMethod,
    },
}

#[derive(Debug)]
pub struct ChannelEngine {
    grid: Grid,
    ells: Vec<i32>,
    bank: LgBank,
    gram: Array2<Complex64>,
    zernike: Arc<ZernikeBasis>,
    path: Path,
}

/// A basis embedded in carrier space with its grid norms.
#[derive(Clone, Debug)]
pub struct PreparedBasis {
    vectors: Vec<Vec<Complex64>>,
}

impl ChannelEngine {
    pub fn new(
        ells: &[i32],
        w0: f64,
        wavelength: f64,
        zernike: Arc<ZernikeBasis>,
        z: f64,
    ) -> Result<Self, HarnessError> {
        let grid = *zernike.grid();
        let mut ells = ells.to_vec();
        ells.sort_unstable();
        ells.dedup();
        let bank = LgBank::new(&ells, w0, wavelength, &grid)?;
        let u = ells.len();
        let mut gram = Array2::zeros((u, u));
        for j in 0..u {
            for k in 0..u {
                gram[[j, k]] = overlap(&bank.fields()[j], &bank.fields()[k])?;
            }
        }
        let path = if z == 0.0 {
            let pixels = support(&bank, &grid);
            let carriers = Array2::from_shape_fn((u, pixels.len()), |(j, p)| {
                bank.fields()[j].amplitudes.as_slice().expect("standard layout")[pixels[p]]
            });
            let modes = Array2::from_shape_fn((zernike.modes().len(), pixels.len()), |(i, p)| {
                let arr = zernike.mode_array(zernike.modes()[i]).expect("mode of this basis");
                arr.as_slice().expect("standard layout")[pixels[p]]
            });
            Path::ScreenPlane {
                pixels,
                carriers,
                modes,
            }
        } else {
            let mut method = None;
            let mut carriers = Vec::with_capacity(u);
            for f in bank.fields() {
                let p = fresnel_propagate(f, z)?;
                method = Some(p.method);
                carriers.push(p.field);
            }
            Path::Propagated {
                z,
                carriers,
                method: method.expect("at least one carrier"),
            }
        };
        Ok(Self {
            grid,
            ells,
            bank,
            gram,
            zernike,
            path,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn ells(&self) -> &[i32] {
        &self.ells
    }

    pub fn bank(&self) -> &LgBank {
        &self.bank
    }

    pub fn zernike(&self) -> &Arc<ZernikeBasis> {
        &self.zernike
    }

    /// Pixels used at the screen plane, if that path is active.
    pub fn support_size(&self) -> Option<usize> {
        match &self.path {
            Path::ScreenPlane { pixels, .. } => Some(pixels.len()),
            Path::Propagated { .. } => None,
        }
    }

    pub fn propagation_method(&self) -> Option<PropagationMethod> {
        match &self.path {
            Path::ScreenPlane { .. } => None,
            Path::Propagated { method, .. } => Some(*method),
        }
    }

    /// `M_jk = ⟨LG_j|e^{iξ}|LG_k⟩` for the screen with the given per-mode coefficients.
    pub fn channel_operator(&self, coeffs: &[f64]) -> Result<Array2<Complex64>, HarnessError> {
        let u = self.ells.len();
        let area = self.grid.pitch() * self.grid.pitch();
        match &self.path {
            Path::ScreenPlane { carriers, modes, pixels } => {
                let mut phase = vec![0.0; pixels.len()];
                for (row, &c) in modes.rows().into_iter().zip(coeffs) {
                    if c != 0.0 {
                        for (p, z) in phase.iter_mut().zip(row) {
                            *p += c * z;
                        }
                    }
                }
                let t: Vec<Complex64> = phase.iter().map(|&p| Complex64::from_polar(1.0, p)).collect();
                let mut m = Array2::zeros((u, u));
                for k in 0..u {
                    let w: Vec<Complex64> = carriers.row(k).iter().zip(&t).map(|(a, b)| a * b).collect();
                    for j in 0..u {
                        let mut acc = Complex64::new(0.0, 0.0);
                        for (a, b) in carriers.row(j).iter().zip(&w) {
                            acc += a.conj() * b;
                        }
                        m[[j, k]] = acc * area;
                    }
                }
                Ok(m)
            }
            Path::Propagated { z, carriers, .. } => {
                let terms: Vec<_> = self
                    .zernike
                    .modes()
                    .iter()
                    .zip(coeffs)
                    .map(|(idx, &c)| crate::turbulence::ZernikeCoeff { n: idx.n, m: idx.m, c })
                    .collect();
                let phase = self.zernike.assemble(&terms)?;
                let mut m = Array2::zeros((u, u));
                for k in 0..u {
                    let mut f = self.bank.fields()[k].clone();
                    ndarray::Zip::from(&mut f.amplitudes)
                        .and(&phase)
                        .for_each(|a, &p| *a *= Complex64::from_polar(1.0, p));
                    let out = fresnel_propagate(&f, *z)?.field;
                    for j in 0..u {
                        m[[j, k]] = overlap(&carriers[j], &out)?;
                    }
                }
                Ok(m)
            }
        }
    }

    /// Embeds a basis defined over `map` into carrier space.
    pub fn prepare(&self, basis: &ModeBasis, map: &OamIndexMap) -> Result<PreparedBasis, HarnessError> {
        let slots: Vec<usize> = map
            .ells()
            .iter()
            .map(|l| {
                self.ells
                    .iter()
                    .position(|e| e == l)
                    .ok_or_else(|| HarnessError::Config(format!("no carrier for charge {l}")))
            })
            .collect::<Result<_, _>>()?;
        let u = self.ells.len();
        let vectors = basis
            .vectors()
            .iter()
            .map(|v| {
                let mut e = vec![Complex64::new(0.0, 0.0); u];
                for (&slot, &c) in slots.iter().zip(v.coeffs()) {
                    e[slot] = c;
                }
                let norm_sq = quad(&e, &self.gram, &e).re;
                let scale = 1.0 / norm_sq.sqrt();
                e.iter().map(|c| c * scale).collect()
            })
            .collect();
        Ok(PreparedBasis { vectors })
    }

    /// Raw matrix `[s, t] = |⟨t|e^{iξ}|s⟩|²` with sent states along rows.
    pub fn projections(&self, m: &Array2<Complex64>, basis: &PreparedBasis) -> Array2<f64> {
        let r = basis.vectors.len();
        let sent: Vec<Vec<Complex64>> = basis.vectors.iter().map(|s| apply(m, s)).collect();
        Array2::from_shape_fn((r, r), |(s, t)| dot(&basis.vectors[t], &sent[s]).norm_sqr())
    }
}

fn apply(m: &Array2<Complex64>, v: &[Complex64]) -> Vec<Complex64> {
    m.rows()
        .into_iter()
        .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
        .collect()
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn quad(a: &[Complex64], m: &Array2<Complex64>, b: &[Complex64]) -> Complex64 {
    dot(a, &apply(m, b))
}

/// Pixels outside the returned set carry at most `SUPPORT_TOL` of the summed carrier power.
fn support(bank: &LgBank, grid: &Grid) -> Vec<usize> {
    let n = grid.n();
    let area = grid.pitch() * grid.pitch();
    let mut weight = vec![0.0; n * n];
    for f in bank.fields() {
        for (w, a) in weight.iter_mut().zip(f.amplitudes.iter()) {
            *w += a.norm_sqr() * area;
        }
    }
    let mut order: Vec<usize> = (0..n * n).collect();
    let radius_sq = |p: usize| {
        let (x, y) = (grid.coord(p % n), grid.coord(p / n));
        x * x + y * y
    };
    order.sort_by(|&a, &b| radius_sq(b).total_cmp(&radius_sq(a)).then(a.cmp(&b)));
    let mut dropped = 0.0;
    let mut cut = 0;
    for &p in &order {
        if dropped + weight[p] > SUPPORT_TOL {
            break;
        }
        dropped += weight[p];
        cut += 1;
    }
    let mut kept: Vec<usize> = order[cut..].to_vec();
    kept.sort_unstable();
    kept
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::raw_projection_matrix;
    use crate::hilbert::{build_mub_family, logical_index_map};
    use crate::turbulence::{ao_correct, apply_screen, RadiusNormalization, TurbulenceParams};
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    const W0: f64 = 1e-3;
    const LAMBDA: f64 = 633e-9;

    fn setup(n: usize, cn2: f64) -> (TurbulenceParams, Arc<ZernikeBasis>) {
        let grid = Grid::new(n, 8.0 * W0 * 2.0).unwrap();
        let p = TurbulenceParams {
            cn2,
            length: 1000.0,
            wavelength: LAMBDA,
            aperture: 8e-3,
            max_order: 7,
            include_m0: false,
            normalization: RadiusNormalization::Aperture,
        };
        let zb = ZernikeBasis::new(&p, &grid).unwrap();
        (p, zb)
    }

    #[test]
    fn modal_projection_matches_field_pipeline() {
        let (p, zb) = setup(256, 1e-14);
        let map = logical_index_map(4).unwrap();
        let engine = ChannelEngine::new(map.ells(), W0, LAMBDA, Arc::clone(&zb), 0.0).unwrap();
        assert!(engine.support_size().unwrap() < 256 * 256);
        let screen = zb.sample(p.r0().unwrap(), &mut ChaCha20Rng::seed_from_u64(11)).unwrap();
        let fam = build_mub_family(4).unwrap();
        for ao in [0u32, 2] {
            let s = ao_correct(&screen, ao);
            let coeffs: Vec<f64> = zb
                .modes()
                .iter()
                .map(|idx| s.coeffs().iter().find(|k| k.n == idx.n && k.m == idx.m).map_or(0.0, |k| k.c))
                .collect();
            let m = engine.channel_operator(&coeffs).unwrap();
            for basis in &fam.bases {
                let fast = engine.projections(&m, &engine.prepare(basis, &map).unwrap());
                let fields: Vec<_> = basis
                    .vectors()
                    .iter()
                    .map(|v| engine.bank().synthesize(v, &map).unwrap())
                    .collect();
                let sent: Vec<_> = fields.iter().map(|f| apply_screen(f, &s).unwrap()).collect();
                let slow = raw_projection_matrix(&sent, &fields).unwrap();
                for (a, b) in fast.iter().zip(&slow) {
                    assert!((a - b).abs() < 1e-10, "{a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn zero_screen_is_identity_channel() {
        let (_, zb) = setup(256, 0.0);
        let map = logical_index_map(8).unwrap();
        let engine = ChannelEngine::new(map.ells(), W0, LAMBDA, Arc::clone(&zb), 0.0).unwrap();
        let m = engine.channel_operator(&vec![0.0; zb.modes().len()]).unwrap();
        for basis in &build_mub_family(8).unwrap().bases {
            let raw = engine.projections(&m, &engine.prepare(basis, &map).unwrap());
            for ((s, t), v) in raw.indexed_iter() {
                let expected = if s == t { 1.0 } else { 0.0 };
                assert!((v - expected).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn propagated_path_agrees_with_screen_plane() {
        // Joint propagation is unitary, so projections at z match those at the screen.
        let (p, zb) = setup(256, 1e-14);
        let map = logical_index_map(3).unwrap();
        let near = ChannelEngine::new(map.ells(), W0, LAMBDA, Arc::clone(&zb), 0.0).unwrap();
        let far = ChannelEngine::new(map.ells(), W0, LAMBDA, Arc::clone(&zb), 2.0).unwrap();
        assert!(far.propagation_method().is_some());
        let screen = zb.sample(p.r0().unwrap(), &mut ChaCha20Rng::seed_from_u64(5)).unwrap();
        let coeffs: Vec<f64> = screen.coeffs().iter().map(|k| k.c).collect();
        let basis = &build_mub_family(3).unwrap().bases[2];
        let a = near.projections(&near.channel_operator(&coeffs).unwrap(), &near.prepare(basis, &map).unwrap());
        let b = far.projections(&far.channel_operator(&coeffs).unwrap(), &far.prepare(basis, &map).unwrap());
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-6, "{x} vs {y}");
        }
    }
}
