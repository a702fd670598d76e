//! Numerical search for Weyl–Heisenberg covariant SIC-POVM fiducials.
//!
//! For an orbit `{D_g φ}` the overlap between members `a` and `b` only depends on the
//! displacement `g = b − a`, so the pair objective
//! `Σ_{a<b} (|<φ_a|φ_b>|² − 1/(d+1))²` equals `d²/2 · Σ_{g≠0} (|<φ|D_g φ>|² − 1/(d+1))²`.
//! The search minimizes the reduced form with L-BFGS over the real coordinates of `φ`, using
//! a scale-invariant objective so that no explicit sphere constraint is needed; iterates are
//! projected back onto the unit sphere at the end of each restart.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::basis::{norm_sqr, BasisVector, ModeBasis, ModeBasisKind, NORM_TOL};
use super::io::ComplexPair;
use super::weyl::{displace, PhaseTable};
use super::HilbertError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SicSearchOptions {
    /// Maximum tolerated | |<φ_a|φ_b>|² − 1/(d+1) |.
    pub tol: f64,
    pub restarts: usize,
    pub max_iters: usize,
    /// Number of correction pairs kept by L-BFGS.
    pub memory: usize,
}

impl Default for SicSearchOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            restarts: 64,
            max_iters: 4000,
            memory: 12,
        }
    }
}

/// Outcome of one restart.
#[derive(Clone, Debug)]
pub struct Candidate {
    pub restart: usize,
    pub fiducial: Vec<Complex64>,
    pub residual: f64,
    pub objective: f64,
    pub iterations: usize,
}

/// Finds a unit vector whose displacement orbit is equiangular within `opts.tol`.
///
/// Every restart runs (in parallel); the converged candidate with the smallest residual wins,
/// ties going to the lowest restart index.
pub fn find_sic_fiducial(d: usize, seed: u64, opts: &SicSearchOptions) -> Result<BasisVector, HilbertError> {
    if d < 2 {
        return Err(HilbertError::InvalidDimension(d));
    }
    if !(opts.tol > 0.0) || opts.restarts == 0 {
        return Err(HilbertError::InvalidSearchOptions);
    }
    let candidates: Vec<Candidate> = (0..opts.restarts)
        .into_par_iter()
        .map(|restart| run_restart(d, seed, restart, opts))
        .collect();

    let best = candidates
        .iter()
        .filter(|c| c.residual <= opts.tol)
        .min_by(|a, b| a.residual.total_cmp(&b.residual).then(a.restart.cmp(&b.restart)));
    match best {
        Some(c) => {
            log::debug!(
                "d={d}: restart {} won with residual {:.3e} (objective {:.3e}, {} iterations)",
                c.restart,
                c.residual,
                c.objective,
                c.iterations
            );
            BasisVector::normalized(c.fiducial.clone(), format!("SIC-fiducial:d{d}"))
        }
        None => {
            let best_residual = candidates.iter().map(|c| c.residual).fold(f64::INFINITY, f64::min);
            Err(HilbertError::SearchFailed {
                dim: d,
                restarts: opts.restarts,
                best_residual,
            })
        }
    }
}

fn run_restart(d: usize, seed: u64, restart: usize, opts: &SicSearchOptions) -> Candidate {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(restart as u64);
    let x0: Vec<f64> = (0..2 * d).map(|_| StandardNormal.sample(&mut rng)).collect();

    let objective = FrameObjective::new(d);
    let (x, iterations) = lbfgs(&objective, x0, opts);
    let psi = to_complex(&x);
    let norm = norm_sqr(&psi).sqrt();
    let fiducial: Vec<Complex64> = psi.iter().map(|c| c / norm).collect();
    let residual = objective.residual(&fiducial);
    let objective_value = objective.value(&x);
    Candidate {
        restart,
        fiducial,
        residual,
        objective: objective_value,
        iterations,
    }
}

fn to_complex(x: &[f64]) -> Vec<Complex64> {
    let d = x.len() / 2;
    (0..d).map(|i| Complex64::new(x[i], x[i + d])).collect()
}

/// Orbit-reduced equiangularity objective over real coordinates `(Re φ, Im φ)`.
pub struct FrameObjective {
    d: usize,
    target: f64,
    phases: PhaseTable,
}

impl FrameObjective {
    pub fn new(d: usize) -> Self {
        Self {
            d,
            target: 1.0 / (d as f64 + 1.0),
            phases: PhaseTable::new(d),
        }
    }

    /// `z_{kj} = <ψ|D_{kj}|ψ>`.
    fn overlap(&self, psi: &[Complex64], k: usize, j: usize) -> Complex64 {
        let d = self.d;
        (0..d)
            .map(|m| psi[(m + k) % d].conj() * self.phases.get(j * m) * psi[m])
            .sum()
    }

    fn displacements(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let d = self.d;
        (0..d).flat_map(move |k| (0..d).map(move |j| (k, j))).skip(1)
    }

    /// max_g | |<ψ|D_g ψ>|² − 1/(d+1) | for a unit vector `ψ`.
    pub fn residual(&self, psi: &[Complex64]) -> f64 {
        self.displacements()
            .map(|(k, j)| (self.overlap(psi, k, j).norm_sqr() - self.target).abs())
            .fold(0.0, f64::max)
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        let psi = to_complex(x);
        let n2 = norm_sqr(&psi).powi(2);
        self.displacements()
            .map(|(k, j)| {
                let r = self.overlap(&psi, k, j).norm_sqr() / n2 - self.target;
                r * r
            })
            .sum()
    }

    /// Value and gradient with respect to the real coordinates.
    pub fn value_and_gradient(&self, x: &[f64]) -> (f64, Vec<f64>) {
        let d = self.d;
        let psi = to_complex(x);
        let norm = norm_sqr(&psi);
        let n2 = norm * norm;
        let n3 = n2 * norm;
        let mut value = 0.0;
        // w = ∂f/∂ψ̄
        let mut w = vec![Complex64::new(0.0, 0.0); d];
        for (k, j) in self.displacements() {
            let z = self.overlap(&psi, k, j);
            let zz = z.norm_sqr();
            let r = zz / n2 - self.target;
            value += r * r;
            let two_r = 2.0 * r;
            let dpsi = displace(&psi, k, j);
            for m in 0..d {
                // (D†ψ)[m] = ω^{−jm} ψ[(m+k) mod d]
                let dagger = self.phases.get(d * d - (j * m) % d) * psi[(m + k) % d];
                let dp = (z.conj() * dpsi[m] + z * dagger) / n2 - psi[m] * (2.0 * zz / n3);
                w[m] += dp * two_r;
            }
        }
        let mut grad = vec![0.0; 2 * d];
        for m in 0..d {
            grad[m] = 2.0 * w[m].re;
            grad[m + d] = 2.0 * w[m].im;
        }
        (value, grad)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Limited-memory BFGS with Armijo backtracking. Returns the final point and iteration count.
fn lbfgs(obj: &FrameObjective, mut x: Vec<f64>, opts: &SicSearchOptions) -> (Vec<f64>, usize) {
    let n = x.len();
    let (mut f, mut g) = obj.value_and_gradient(&x);
    let mut s_hist: Vec<Vec<f64>> = Vec::with_capacity(opts.memory);
    let mut y_hist: Vec<Vec<f64>> = Vec::with_capacity(opts.memory);
    let mut iters = 0;
    let mut checkpoint = f;

    while iters < opts.max_iters {
        // Zero is attainable; stop well below what the tolerance needs.
        if f < 1e-30 || dot(&g, &g).sqrt() < 1e-18 {
            break;
        }
        iters += 1;
        // A restart stuck in a nonzero local minimum stops improving; give up on it.
        if iters % 200 == 0 {
            if f > 1e-20 && f > 0.999 * checkpoint {
                break;
            }
            checkpoint = f;
        }

        // Two-loop recursion for the search direction.
        let mut q = g.clone();
        let mut alphas = vec![0.0; s_hist.len()];
        for i in (0..s_hist.len()).rev() {
            let rho = 1.0 / dot(&y_hist[i], &s_hist[i]);
            alphas[i] = rho * dot(&s_hist[i], &q);
            for t in 0..n {
                q[t] -= alphas[i] * y_hist[i][t];
            }
        }
        let gamma = match (s_hist.last(), y_hist.last()) {
            (Some(s), Some(y)) => dot(s, y) / dot(y, y),
            _ => 1.0 / dot(&g, &g).sqrt().max(1e-300),
        };
        for v in &mut q {
            *v *= gamma;
        }
        for i in 0..s_hist.len() {
            let rho = 1.0 / dot(&y_hist[i], &s_hist[i]);
            let beta = rho * dot(&y_hist[i], &q);
            for t in 0..n {
                q[t] += s_hist[i][t] * (alphas[i] - beta);
            }
        }
        let mut dir: Vec<f64> = q.iter().map(|v| -v).collect();
        let mut slope = dot(&g, &dir);
        if slope >= 0.0 {
            // Not a descent direction; fall back to steepest descent.
            s_hist.clear();
            y_hist.clear();
            dir = g.iter().map(|v| -v).collect();
            slope = -dot(&g, &g);
        }

        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..60 {
            let trial: Vec<f64> = x.iter().zip(&dir).map(|(xi, di)| xi + step * di).collect();
            let (ft, gt) = obj.value_and_gradient(&trial);
            if ft <= f + 1e-4 * step * slope {
                accepted = Some((trial, ft, gt));
                break;
            }
            step *= 0.5;
        }
        let Some((x_new, f_new, g_new)) = accepted else {
            break;
        };

        let s: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        if dot(&s, &y) > 1e-300 {
            if s_hist.len() == opts.memory {
                s_hist.remove(0);
                y_hist.remove(0);
            }
            s_hist.push(s);
            y_hist.push(y);
        }
        x = x_new;
        f = f_new;
        g = g_new;
    }
    (x, iters)
}

/// The `d²` vectors `D_{kj}·φ`, element `k·d + j`.
pub fn build_sic_povm(d: usize, fiducial: &BasisVector) -> Result<ModeBasis, HilbertError> {
    if fiducial.dim() != d {
        return Err(HilbertError::DimensionMismatch {
            expected: d,
            found: fiducial.dim(),
        });
    }
    let norm2 = norm_sqr(fiducial.coeffs());
    if (norm2 - 1.0).abs() > NORM_TOL {
        return Err(HilbertError::NotNormalized { norm: norm2.sqrt() });
    }
    let mut vectors = Vec::with_capacity(d * d);
    for k in 0..d {
        for j in 0..d {
            let v = displace(fiducial.coeffs(), k, j);
            vectors.push(BasisVector::normalized(v, format!("SIC:k{k}j{j}"))?);
        }
    }
    ModeBasis::new(d, ModeBasisKind::SicPovm, vectors)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct CacheEntry {
    dim: usize,
    seed: u64,
    tol: f64,
    fiducial: Vec<ComplexPair>,
}

/// On-disk store of previously found fiducials keyed by `(d, seed, tol)`.
#[derive(Clone, Debug, Default)]
pub struct FiducialCache {
    entries: BTreeMap<(usize, u64, u64), Vec<Complex64>>,
}

#[derive(Serialize, Deserialize)]
struct CacheFile {
    entries: Vec<CacheEntry>,
}

impl FiducialCache {
    /// Loads the cache at `path`, or an empty cache if it does not exist.
    pub fn load(path: &Path) -> Result<Self, HilbertError> {
        if !path.exists() {
            return Ok(Self::default());
        }
        let text = fs::read_to_string(path).map_err(|e| HilbertError::Io(path.display().to_string(), e))?;
        let file: CacheFile = serde_json::from_str(&text)?;
        let entries = file
            .entries
            .into_iter()
            .map(|e| {
                let v = e.fiducial.into_iter().map(Complex64::from).collect();
                ((e.dim, e.seed, e.tol.to_bits()), v)
            })
            .collect();
        Ok(Self { entries })
    }

    pub fn save(&self, path: &Path) -> Result<(), HilbertError> {
        let entries = self
            .entries
            .iter()
            .map(|(&(dim, seed, tol), v)| CacheEntry {
                dim,
                seed,
                tol: f64::from_bits(tol),
                fiducial: v.iter().copied().map(ComplexPair::from).collect(),
            })
            .collect();
        let text = serde_json::to_string_pretty(&CacheFile { entries })?;
        fs::write(path, text).map_err(|e| HilbertError::Io(path.display().to_string(), e))
    }

    pub fn get(&self, d: usize, seed: u64, tol: f64) -> Option<BasisVector> {
        self.entries
            .get(&(d, seed, tol.to_bits()))
            .and_then(|v| BasisVector::normalized(v.clone(), format!("SIC-fiducial:d{d}")).ok())
    }

    pub fn insert(&mut self, d: usize, seed: u64, tol: f64, fiducial: &BasisVector) {
        self.entries
            .insert((d, seed, tol.to_bits()), fiducial.coeffs().to_vec());
    }

    /// Cached fiducial if present, otherwise searches and records the result.
    pub fn get_or_search(&mut self, d: usize, seed: u64, opts: &SicSearchOptions) -> Result<BasisVector, HilbertError> {
        if let Some(v) = self.get(d, seed, opts.tol) {
            return Ok(v);
        }
        let v = find_sic_fiducial(d, seed, opts)?;
        self.insert(d, seed, opts.tol, &v);
        Ok(v)
    }
}
