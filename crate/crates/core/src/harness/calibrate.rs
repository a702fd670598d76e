//! Bisection on `log10(cn2)` until a probe basis reaches a target ensemble QDER.

use serde::{Deserialize, Serialize};

use super::config::{AoSetting, SimConfig};
use super::run::run_experiment;
use super::HarnessError;

/// The basis whose ensemble QDER is matched.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CalibrationTarget {
    pub dim: usize,
    /// Basis tag, e.g. `MUB0` for the OAM basis.
    pub basis: String,
    pub ao: AoSetting,
    /// Fraction.
    pub qder: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CalibrationOptions {
    /// Bracket on `log10(cn2)`.
    pub log10_lo: f64,
    pub log10_hi: f64,
    pub max_iters: usize,
}

impl Default for CalibrationOptions {
    fn default() -> Self {
        Self {
            log10_lo: -17.0,
            log10_hi: -12.0,
            max_iters: 40,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CalibrationResult {
    pub target: CalibrationTarget,
    pub cn2: f64,
    pub log10_cn2: f64,
    pub achieved_qder: f64,
    pub standard_error: f64,
    pub iterations: usize,
    /// QDER never decreased as `cn2` grew across the evaluated points.
    pub monotone: bool,
    /// `(log10 cn2, qder)` for every evaluation, in order.
    pub history: Vec<(f64, f64)>,
    pub warnings: Vec<String>,
}

/// Every evaluation reuses the configured seed, so the probe sees common random numbers.
pub fn calibrate_cn2(
    target: &CalibrationTarget,
    config: &SimConfig,
    opts: &CalibrationOptions,
) -> Result<CalibrationResult, HarnessError> {
    if !(opts.log10_lo < opts.log10_hi) {
        return Err(HarnessError::Config("calibration bracket must satisfy lo < hi".into()));
    }
    if !(0.0..1.0).contains(&target.qder) {
        return Err(HarnessError::Config(format!("target QDER {} is not a fraction", target.qder)));
    }
    let mut probe = config.clone();
    probe.dimensions = vec![target.dim];
    probe.ao.settings = vec![target.ao];
    probe.output_dir = None;
    let mut history: Vec<(f64, f64)> = Vec::new();
    let mut eval = |log10: f64| -> Result<(f64, f64), HarnessError> {
        probe.channel.cn2 = 10f64.powf(log10);
        let report = run_experiment(&probe)?;
        let r = report
            .find(target.dim, &target.basis, target.ao)
            .ok_or_else(|| HarnessError::Config(format!("basis {} not evaluated for d = {}", target.basis, target.dim)))?;
        log::debug!("log10 cn2 = {log10:.4}: qder = {:.5}", r.qder.qder);
        history.push((log10, r.qder.qder));
        Ok((r.qder.qder, r.qder_standard_error()))
    };

    let (mut lo, mut hi) = (opts.log10_lo, opts.log10_hi);
    let (q_lo, se_lo) = eval(lo)?;
    let mut warnings = Vec::new();
    let finish = |log10: f64, q: f64, se: f64, iterations, history: Vec<(f64, f64)>, warnings| {
        let monotone = history
            .iter()
            .all(|a| history.iter().all(|b| !(a.0 < b.0 && a.1 > b.1)));
        CalibrationResult {
            target: target.clone(),
            cn2: 10f64.powf(log10),
            log10_cn2: log10,
            achieved_qder: q,
            standard_error: se,
            iterations,
            monotone,
            history,
            warnings,
        }
    };
    if target.qder <= q_lo {
        warnings.push(format!(
            "target is at or below the QDER floor {q_lo:.3e} of the bracket: effectively zero turbulence"
        ));
        drop(eval);
        return Ok(finish(lo, q_lo, se_lo, 1, history, warnings));
    }
    let (q_hi, _) = eval(hi)?;
    if target.qder > q_hi {
        return Err(HarnessError::CalibrationFailed {
            target: target.qder,
            min: q_lo,
            max: q_hi,
        });
    }
    let mut best = (hi, q_hi, f64::INFINITY);
    for iter in 1..=opts.max_iters {
        let mid = 0.5 * (lo + hi);
        let (q, se) = eval(mid)?;
        best = (mid, q, se);
        if (q - target.qder).abs() <= se {
            drop(eval);
            return Ok(finish(mid, q, se, iter + 2, history, warnings));
        }
        if q < target.qder {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    drop(eval);
    warnings.push(format!(
        "not within one standard error after {} bisection steps; returning the last midpoint",
        opts.max_iters
    ));
    Ok(finish(best.0, best.1, best.2, opts.max_iters + 2, history, warnings))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::GridConfig;

    fn probe_config() -> SimConfig {
        SimConfig {
            realizations: 20,
            grid: GridConfig {
                n: 128,
                ..GridConfig::default()
            },
            ..SimConfig::default()
        }
    }

    fn oam(dim: usize, qder: f64) -> CalibrationTarget {
        CalibrationTarget {
            dim,
            basis: "MUB0".into(),
            ao: AoSetting::Off,
            qder,
        }
    }

    #[test]
    fn zero_target_returns_bracket_minimum() {
        let r = calibrate_cn2(&oam(2, 0.0), &probe_config(), &CalibrationOptions::default()).unwrap();
        assert_eq!(r.log10_cn2, -17.0);
        assert_eq!(r.warnings.len(), 1);
    }

    #[test]
    fn two_probes_reproduce_their_targets() {
        let config = probe_config();
        for t in [oam(2, 0.05), oam(3, 0.08)] {
            let r = calibrate_cn2(&t, &config, &CalibrationOptions::default()).unwrap();
            assert!(r.monotone);
            let mut check = config.clone();
            check.dimensions = vec![t.dim];
            check.channel.cn2 = r.cn2;
            let rep = run_experiment(&check).unwrap();
            let b = rep.find(t.dim, &t.basis, t.ao).unwrap();
            assert!((b.qder.qder - t.qder).abs() <= b.qder_standard_error(), "{t:?}: {}", b.qder.qder);
        }
    }

    #[test]
    fn unreachable_target_reports_range() {
        let opts = CalibrationOptions {
            log10_lo: -17.0,
            log10_hi: -16.0,
            max_iters: 5,
        };
        match calibrate_cn2(&oam(2, 0.5), &probe_config(), &opts) {
            Err(HarnessError::CalibrationFailed { min, max, .. }) => assert!(min < max && max < 0.5),
            other => panic!("{other:?}"),
        }
    }
}
