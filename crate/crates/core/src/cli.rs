//! Command-line entry point.
//!
//! Failures are reported on stderr as one JSON object `{"error": kind, "message": ...}`
//! with a nonzero exit status. `MODESIM_THREADS` caps the worker pool.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde_json::json;

use crate::analysis::{Protocol, ThresholdTable};
use crate::harness::{
    build_dimension_bases, calibrate_cn2, run_experiment, run_validation, write_field_dumps, write_outputs,
    AoSetting, BasisSelection, CalibrationOptions, CalibrationTarget, HarnessError, SicConfig, SimConfig,
};
use crate::hilbert::{certify_mub, certify_sic, BasisDocument, ModeBasisKind};
use crate::optics::write_json;
use crate::turbulence::{ao_correct, ZernikeBasis};

pub const THREADS_ENV: &str = "MODESIM_THREADS";

#[derive(Debug, Parser)]
#[command(name = "modesim", version, about = "Spatial-mode QKD channel simulator")]
struct Cli {
    /// Increase log verbosity (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Construct (and optionally certify) the bases of one dimension.
    Bases(BasesArgs),
    /// Sample phase screens and write their coefficients and phase arrays.
    Screen(ScreenArgs),
    /// Run the configured ensemble and write the report.
    Simulate(SimulateArgs),
    /// Find the cn2 at which a probe basis reaches a target QDER.
    Calibrate(CalibrateArgs),
    /// Print the security thresholds.
    Thresholds(ThresholdsArgs),
    /// Run the invariant suite.
    Validate(ValidateArgs),
}

#[derive(Debug, Args)]
struct BasesArgs {
    #[arg(long)]
    dim: usize,
    /// Check unbiasedness (and SIC equiangularity with --sic).
    #[arg(long)]
    certify: bool,
    /// Also build the SIC-POVM.
    #[arg(long)]
    sic: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    /// Write the basis documents as a JSON array.
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ScreenArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    count: usize,
    #[arg(long)]
    out: PathBuf,
    /// Decimation of the phase-array dump.
    #[arg(long, default_value_t = 4)]
    stride: usize,
    /// Remove the AO-corrected orders before writing.
    #[arg(long)]
    ao: bool,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `output_dir` in the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also dump every synthesized sent field.
    #[arg(long)]
    dump_fields: bool,
    #[arg(long, default_value_t = 4)]
    stride: usize,
}

#[derive(Debug, Args)]
struct CalibrateArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    /// Target QDER as a fraction.
    #[arg(long, default_value_t = 0.0958)]
    target: f64,
    #[arg(long, default_value_t = 2)]
    dim: usize,
    #[arg(long, default_value = "MUB0")]
    basis: String,
    #[arg(long, value_parser = parse_ao, default_value = "off")]
    ao: AoSetting,
    #[arg(long, default_value_t = -17.0, allow_negative_numbers = true)]
    log10_lo: f64,
    #[arg(long, default_value_t = -12.0, allow_negative_numbers = true)]
    log10_hi: f64,
}

#[derive(Debug, Args)]
struct ThresholdsArgs {
    #[arg(long)]
    dim: Option<usize>,
}

#[derive(Debug, Args)]
struct ValidateArgs {
    /// Acceptance-sized grids and ensembles.
    #[arg(long)]
    full: bool,
}

fn parse_ao(s: &str) -> Result<AoSetting, String> {
    match s {
        "off" => Ok(AoSetting::Off),
        "on" => Ok(AoSetting::On),
        _ => Err(format!("expected 'off' or 'on', got '{s}'")),
    }
}

fn report_error(kind: &str, message: &str) {
    eprintln!("{}", json!({ "error": kind, "message": message }));
}

/// Parses `argv` (program name first), runs the command and returns the exit status.
pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            print!("{e}");
            return 0;
        }
        Err(e) => {
            report_error("usage", e.to_string().trim());
            return 2;
        }
    };
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    let _ = env_logger::Builder::new().filter_level(level).format_timestamp(None).try_init();

    let result = match std::env::var(THREADS_ENV).ok().map(|v| v.parse::<usize>()) {
        None => dispatch(cli.command),
        Some(Ok(t)) if t > 0 => match rayon::ThreadPoolBuilder::new().num_threads(t).build() {
            Ok(pool) => pool.install(|| dispatch(cli.command)),
            Err(e) => Err(HarnessError::Config(format!("thread pool: {e}"))),
        },
        Some(_) => Err(HarnessError::Config(format!("{THREADS_ENV} must be a positive integer"))),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            report_error(e.kind(), &e.to_string());
            1
        }
    }
}

fn dispatch(cmd: Command) -> Result<i32, HarnessError> {
    match cmd {
        Command::Bases(a) => bases(a),
        Command::Screen(a) => screen(a),
        Command::Simulate(a) => simulate(a),
        Command::Calibrate(a) => calibrate(a),
        Command::Thresholds(a) => thresholds(a),
        Command::Validate(a) => validate(a),
    }
}

fn load_config(path: Option<&Path>) -> Result<SimConfig, HarnessError> {
    path.map_or_else(|| Ok(SimConfig::default()), SimConfig::from_file)
}

fn bases(a: BasesArgs) -> Result<i32, HarnessError> {
    let selection = BasisSelection {
        sic: a.sic,
        ..BasisSelection::default()
    };
    let sic = SicConfig {
        seed: a.seed,
        ..SicConfig::default()
    };
    let db = build_dimension_bases(a.dim, &selection, &sic, None)?;
    let mut code = 0;
    println!("d = {}: {} bases{}", a.dim, db.bases.len(), if db.partial_family { " (partial MUB family)" } else { "" });
    for b in &db.bases {
        println!("  {:<5} {:<12} {} vectors", b.tag(), b.kind().to_string(), b.len());
    }
    if a.certify {
        let mubs: Vec<_> = db.bases.iter().filter(|b| b.kind() != ModeBasisKind::SicPovm).cloned().collect();
        let cert = certify_mub(&mubs, a.tol)?;
        println!("max Gram deviation: {:.3e}", cert.max_gram_deviation);
        println!("max unbiasedness deviation: {:.3e}", cert.max_unbiased_deviation);
        println!("MUB certification: {}", if cert.pass { "pass" } else { "FAIL" });
        if !cert.pass {
            code = 1;
        }
        if let Some(povm) = db.bases.iter().find(|b| b.kind() == ModeBasisKind::SicPovm) {
            let c = certify_sic(povm, sic.search.tol.max(a.tol))?;
            println!("max equiangular deviation: {:.3e}", c.max_equiangular_deviation);
            println!("identity residual: {:.3e}", c.identity_residual);
            println!("SIC certification: {}", if c.pass { "pass" } else { "FAIL" });
            if !c.pass {
                code = 1;
            }
        }
    }
    if let Some(path) = &a.json {
        let docs: Vec<BasisDocument> = db.bases.iter().map(BasisDocument::from).collect();
        write_json(path, &docs)?;
    }
    Ok(code)
}

fn screen(a: ScreenArgs) -> Result<i32, HarnessError> {
    let cfg = load_config(a.config.as_deref())?.resolved()?;
    let params = cfg.turbulence_params();
    let basis = ZernikeBasis::new(&params, &cfg.grid()?)?;
    let r0 = params.r0()?;
    fs::create_dir_all(&a.out).map_err(|e| HarnessError::Io(a.out.display().to_string(), e))?;
    // Same streams as the ensemble runner, so screen i is realization i of `simulate`.
    for i in 0..a.count {
        let mut rng = ChaCha20Rng::seed_from_u64(cfg.seed);
        rng.set_stream(i as u64);
        let mut s = basis.sample(r0, &mut rng)?;
        if a.ao {
            s = ao_correct(&s, cfg.ao.corrected_orders);
        }
        write_json(&a.out.join(format!("screen_{i}.json")), &s.to_document(r0))?;
        write_json(&a.out.join(format!("phase_{i}.json")), &s.dump(a.stride))?;
    }
    println!("wrote {} screens to {}", a.count, a.out.display());
    Ok(0)
}

fn simulate(a: SimulateArgs) -> Result<i32, HarnessError> {
    let cfg = SimConfig::from_file(&a.config)?;
    let dir = a
        .out
        .clone()
        .or_else(|| cfg.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    let report = run_experiment(&cfg)?;
    write_outputs(&report, &dir)?;
    if a.dump_fields {
        write_field_dumps(&cfg, &dir, a.stride)?;
    }
    for r in &report.results {
        println!("d={} {:<5} ao-{:<3} qder {:.4} ± {:.4}", r.dim, r.basis, r.ao, r.qder.qder, r.qder.stddev);
    }
    for w in &report.warnings {
        log::warn!("{w}");
    }
    println!("report written to {}", dir.join("report.json").display());
    Ok(0)
}

fn calibrate(a: CalibrateArgs) -> Result<i32, HarnessError> {
    let cfg = load_config(a.config.as_deref())?;
    let target = CalibrationTarget {
        dim: a.dim,
        basis: a.basis,
        ao: a.ao,
        qder: a.target,
    };
    let opts = CalibrationOptions {
        log10_lo: a.log10_lo,
        log10_hi: a.log10_hi,
        ..CalibrationOptions::default()
    };
    let result = calibrate_cn2(&target, &cfg, &opts)?;
    println!("{}", serde_json::to_string_pretty(&result)?);
    Ok(0)
}

fn thresholds(a: ThresholdsArgs) -> Result<i32, HarnessError> {
    let table = ThresholdTable::default();
    let mut dims: Vec<usize> = table.entries().iter().map(|e| e.dim).collect();
    dims.dedup();
    if let Some(d) = a.dim {
        if !dims.contains(&d) {
            return Err(crate::analysis::AnalysisError::NotAvailable {
                dim: d,
                protocol: Protocol::Bb84,
            }
            .into());
        }
        dims = vec![d];
    }
    for d in &dims {
        let line: Vec<String> = table
            .for_dim(*d)
            .iter()
            .map(|e| format!("{} {:.2}%", e.protocol, 100.0 * e.threshold))
            .collect();
        if a.dim.is_some() {
            println!("{}", line.join(", "));
        } else {
            println!("d={d}: {}", line.join(", "));
        }
    }
    Ok(0)
}

fn validate(a: ValidateArgs) -> Result<i32, HarnessError> {
    let report = run_validation(a.full)?;
    for c in &report.checks {
        println!(
            "{:<26} {:<4} measured {:.3e} bound {:.1e} ({:.1} s)",
            c.name,
            if c.pass { "pass" } else { "FAIL" },
            c.measured,
            c.bound,
            c.seconds
        );
    }
    Ok(if report.pass { 0 } else { 1 })
}
