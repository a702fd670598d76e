//! Ensemble runs and their on-disk outputs.

use std::fs;
use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use ndarray::Array2;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::bases::{build_dimension_bases, DimensionBases, FiducialRecord};
use super::config::{AoSetting, SimConfig};
use super::engine::{ChannelEngine, PreparedBasis};
use super::HarnessError;
use crate::analysis::{
    crosstalk_csv, ensemble_average_with, normalize_crosstalk, qder, qder_summary_csv, AveragingOrder,
    CrosstalkKind, CrosstalkMatrix, QderReport,
};
use crate::hilbert::{FiducialCache, ModeBasisKind};
use crate::optics::{field_dump, write_json, PropagationMethod};
use crate::turbulence::ZernikeBasis;

#[derive(Clone, Debug, Serialize)]
pub struct SoftwareInfo {
    pub name: String,
    pub version: String,
}

impl Default for SoftwareInfo {
    fn default() -> Self {
        Self {
            name: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }
}

/// Quantities computed from the configuration, reported so runs are self-describing.
#[derive(Clone, Debug, Serialize)]
pub struct DerivedMetadata {
    /// Fried parameter, m (infinite for zero turbulence, serialized as null).
    pub r0: Option<f64>,
    pub window: f64,
    pub pitch: f64,
    /// Diameter over which the Zernike radius is normalized, m.
    pub zernike_diameter: f64,
    pub zernike_modes: usize,
    pub carrier_ells: Vec<i32>,
    pub engine: &'static str,
    pub propagation_method: Option<PropagationMethod>,
    pub support_pixels: Option<usize>,
    pub dispersion: &'static str,
    pub screen_sharing: &'static str,
    pub seed_derivation: &'static str,
    pub partial_families: Vec<usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct BasisResult {
    pub dim: usize,
    pub basis: String,
    pub name: String,
    pub ao: AoSetting,
    pub labels: Vec<String>,
    pub crosstalk: CrosstalkMatrix,
    pub qder: QderReport,
    /// QDER of each realization's own normalized matrix.
    #[serde(skip)]
    pub realization_qder: Vec<f64>,
}

impl BasisResult {
    /// Standard error of the ensemble QDER estimated from the per-realization spread.
    pub fn qder_standard_error(&self) -> f64 {
        let n = self.realization_qder.len() as f64;
        let mean = self.realization_qder.iter().sum::<f64>() / n;
        let var = self.realization_qder.iter().map(|q| (q - mean).powi(2)).sum::<f64>() / n;
        (var / n).sqrt()
    }
}

/// Wall-clock seconds per stage. Kept out of `report.json` so reports are reproducible.
#[derive(Clone, Debug, Default, Serialize)]
pub struct Timing {
    pub total: f64,
    pub stages: Vec<(String, f64)>,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub software: SoftwareInfo,
    pub config_hash: String,
    pub config: SimConfig,
    pub derived: DerivedMetadata,
    pub results: Vec<BasisResult>,
    pub sic_fiducials: Vec<FiducialRecord>,
    pub warnings: Vec<String>,
    #[serde(skip)]
    pub timing: Timing,
}

impl RunReport {
    pub fn find(&self, dim: usize, basis: &str, ao: AoSetting) -> Option<&BasisResult> {
        self.results.iter().find(|r| r.dim == dim && r.basis == basis && r.ao == ao)
    }

    pub fn to_json(&self) -> Result<String, HarnessError> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

struct Job<'a> {
    dim: usize,
    basis: &'a crate::hilbert::ModeBasis,
    prepared: PreparedBasis,
}

/// Runs the configured sweep on the current rayon pool (or a dedicated one of `threads`).
pub fn run_experiment(config: &SimConfig) -> Result<RunReport, HarnessError> {
    run_experiment_on(config, None)
}

pub fn run_experiment_on(config: &SimConfig, threads: Option<usize>) -> Result<RunReport, HarnessError> {
    match threads {
        None => run(config),
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| HarnessError::Config(format!("thread pool: {e}")))?
            .install(|| run(config)),
    }
}

fn run(config: &SimConfig) -> Result<RunReport, HarnessError> {
    let start = Instant::now();
    let mut stages = Vec::new();
    let mut lap = Instant::now();
    let mut stage = |name: &str, lap: &mut Instant| {
        stages.push((name.to_string(), lap.elapsed().as_secs_f64()));
        *lap = Instant::now();
    };

    let cfg = config.resolved()?;
    let config_hash = cfg.hash()?;
    let grid = cfg.grid()?;
    let params = cfg.turbulence_params();
    let r0 = params.r0()?;
    let table = cfg.threshold_table()?;
    let mut warnings = Vec::new();
    if cfg.channel.cn2 == 0.0 {
        warnings.push("cn2 = 0: turbulence disabled".to_string());
    }

    let mut cache = match &cfg.sic.cache {
        Some(p) if cfg.bases.sic && p.exists() => Some(FiducialCache::load(p)?),
        Some(_) if cfg.bases.sic => Some(FiducialCache::default()),
        _ => None,
    };
    let dims: Vec<DimensionBases> = cfg
        .dimensions
        .iter()
        .map(|&d| build_dimension_bases(d, &cfg.bases, &cfg.sic, cache.as_mut()))
        .collect::<Result<_, _>>()?;
    if let (Some(c), Some(p)) = (&cache, &cfg.sic.cache) {
        c.save(p)?;
    }
    let partial_families: Vec<usize> = dims.iter().filter(|d| d.partial_family).map(|d| d.dim).collect();
    for d in &partial_families {
        warnings.push(format!("d = {d}: only a partial MUB family is known"));
    }
    stage("bases", &mut lap);

    let zernike = ZernikeBasis::new(&params, &grid)?;
    let mut ells: Vec<i32> = dims.iter().flat_map(|d| d.map.ells().to_vec()).collect();
    ells.sort_unstable();
    ells.dedup();
    let engine = ChannelEngine::new(&ells, cfg.grid.w0, cfg.wavelength, Arc::clone(&zernike), cfg.z)?;
    let jobs: Vec<Job> = dims
        .iter()
        .flat_map(|d| d.bases.iter().map(move |b| (d, b)))
        .map(|(d, b)| {
            Ok(Job {
                dim: d.dim,
                basis: b,
                prepared: engine.prepare(b, &d.map)?,
            })
        })
        .collect::<Result<_, HarnessError>>()?;
    stage("engine", &mut lap);

    let sigmas = zernike.sigmas(r0)?;
    let corrected = cfg.ao.corrected_orders;
    let settings = cfg.ao.settings.clone();
    // One screen per realization on its own stream, shared by every dimension, basis and
    // AO setting.
    let per_realization: Vec<Vec<Array2<f64>>> = (0..cfg.realizations)
        .into_par_iter()
        .map(|index| {
            let mut rng = ChaCha20Rng::seed_from_u64(cfg.seed);
            rng.set_stream(index as u64);
            let coeffs: Vec<f64> = zernike.draw_coefficients(&sigmas, &mut rng).iter().map(|k| k.c).collect();
            let mut out = Vec::with_capacity(settings.len() * jobs.len());
            for &ao in &settings {
                let c: Vec<f64> = match ao {
                    AoSetting::Off => coeffs.clone(),
                    AoSetting::On => zernike
                        .modes()
                        .iter()
                        .zip(&coeffs)
                        .map(|(idx, &c)| if idx.n > corrected { c } else { 0.0 })
                        .collect(),
                };
                let m = engine.channel_operator(&c).map_err(|e| HarnessError::InRealization {
                    index,
                    label: format!("screen, ao {ao}"),
                    source: Box::new(e),
                })?;
                out.extend(jobs.iter().map(|j| engine.projections(&m, &j.prepared)));
            }
            Ok(out)
        })
        .collect::<Result<_, HarnessError>>()?;
    stage("realizations", &mut lap);

    let mut results = Vec::with_capacity(settings.len() * jobs.len());
    for (a, &ao) in settings.iter().enumerate() {
        for (b, job) in jobs.iter().enumerate() {
            let slot = a * jobs.len() + b;
            let raws: Vec<Array2<f64>> = per_realization.iter().map(|r| r[slot].clone()).collect();
            let kind = match job.basis.kind() {
                ModeBasisKind::SicPovm => CrosstalkKind::SicLike,
                _ => CrosstalkKind::MubLike,
            };
            let label = format!("d{} {}", job.dim, job.basis.kind());
            let crosstalk = ensemble_average_with(&raws, kind, &label, cfg.averaging)?;
            let realization_qder = raws
                .iter()
                .enumerate()
                .map(|(index, raw)| {
                    normalize_crosstalk(raw, kind, &label)
                        .map(|c| qder(&c).qder)
                        .map_err(|e| HarnessError::InRealization {
                            index,
                            label: label.clone(),
                            source: Box::new(e.into()),
                        })
                })
                .collect::<Result<_, _>>()?;
            results.push(BasisResult {
                dim: job.dim,
                basis: job.basis.tag(),
                name: job.basis.kind().to_string(),
                ao,
                labels: job.basis.vectors().iter().map(|v| v.label().to_string()).collect(),
                qder: qder(&crosstalk).with_thresholds(&table),
                crosstalk,
                realization_qder,
            });
        }
    }
    stage("reduction", &mut lap);

    let derived = DerivedMetadata {
        r0: r0.is_finite().then_some(r0),
        window: grid.window(),
        pitch: grid.pitch(),
        zernike_diameter: zernike.diameter(),
        zernike_modes: zernike.modes().len(),
        carrier_ells: engine.ells().to_vec(),
        engine: if cfg.z == 0.0 {
            "modal projection at the screen plane"
        } else {
            "Fresnel propagation of aberrated carriers"
        },
        propagation_method: engine.propagation_method(),
        support_pixels: engine.support_size(),
        dispersion: match cfg.averaging {
            AveragingOrder::AverageThenNormalize => {
                "population std of raw per-realization values, scaled by the mean-matrix row factors"
            }
            AveragingOrder::NormalizeThenAverage => "population std of per-realization row-normalized values",
        },
        screen_sharing: "one screen per realization shared across dimensions, bases and AO settings",
        seed_derivation: "ChaCha20 keyed by the master seed, stream = realization index",
        partial_families,
    };
    let sic_fiducials = dims.iter().filter_map(|d| d.fiducial.clone()).collect();
    let timing = Timing {
        total: start.elapsed().as_secs_f64(),
        stages,
    };
    log::info!("run finished in {:.2} s", timing.total);
    Ok(RunReport {
        software: SoftwareInfo::default(),
        config_hash,
        config: cfg,
        derived,
        results,
        sic_fiducials,
        warnings,
        timing,
    })
}

/// Writes `report.json`, `timing.json`, `qder_summary.csv` and one crosstalk CSV per
/// (dimension, basis, AO setting).
pub fn write_outputs(report: &RunReport, dir: &Path) -> Result<(), HarnessError> {
    let io = |p: &Path, e| HarnessError::Io(p.display().to_string(), e);
    fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
    let put = |name: &str, text: &str| {
        let p = dir.join(name);
        fs::write(&p, text).map_err(|e| io(&p, e))
    };
    put("report.json", &report.to_json()?)?;
    put("timing.json", &serde_json::to_string_pretty(&report.timing)?)?;
    for r in &report.results {
        put(&format!("crosstalk_d{}_{}_ao-{}.csv", r.dim, r.basis, r.ao), &crosstalk_csv(&r.crosstalk, &r.labels))?;
    }
    let ao: Vec<String> = report.results.iter().map(|r| r.ao.to_string()).collect();
    put(
        "qder_summary.csv",
        &qder_summary_csv(report.results.iter().zip(&ao).map(|(r, a)| (&r.qder, a.as_str()))),
    )?;
    Ok(())
}

/// Dumps every unaberrated sent field as `fields/d{d}_{basis}_{i}.json`.
pub fn write_field_dumps(config: &SimConfig, dir: &Path, stride: usize) -> Result<usize, HarnessError> {
    let cfg = config.resolved()?;
    let grid = cfg.grid()?;
    let out = dir.join("fields");
    fs::create_dir_all(&out).map_err(|e| HarnessError::Io(out.display().to_string(), e))?;
    let mut count = 0;
    for &d in &cfg.dimensions {
        let db = build_dimension_bases(d, &cfg.bases, &cfg.sic, None)?;
        let bank = crate::optics::LgBank::for_map(&db.map, cfg.grid.w0, cfg.wavelength, &grid)?;
        for b in &db.bases {
            for (i, v) in b.vectors().iter().enumerate() {
                let f = bank.synthesize(v, &db.map)?;
                let label = format!("d{d} {} {}", b.tag(), v.label());
                write_json(&out.join(format!("d{d}_{}_{i}.json", b.tag())), &field_dump(&f, &label, stride))?;
                count += 1;
            }
        }
    }
    Ok(count)
}
