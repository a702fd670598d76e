//! Run configuration.
//!
//! A single JSON document in SI units; error rates and thresholds are fractions. Every
//! field is optional in the input file and the resolved document (all defaults filled in,
//! including the grid window) is echoed into the report and hashed.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::HarnessError;
use crate::analysis::{AveragingOrder, ThresholdEntry, ThresholdTable};
use crate::hilbert::{is_supported_dim, SicSearchOptions};
use crate::optics::Grid;
use crate::turbulence::{RadiusNormalization, TurbulenceParams};

pub const DEFAULT_DIMENSIONS: [usize; 6] = [2, 3, 4, 5, 6, 8];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub dimensions: Vec<usize>,
    pub bases: BasisSelection,
    /// Wavelength, m.
    pub wavelength: f64,
    pub grid: GridConfig,
    pub channel: ChannelConfig,
    pub ao: AoConfig,
    pub realizations: usize,
    /// Distance at which overlaps are evaluated, m. Zero evaluates at the screen plane.
    pub z: f64,
    pub seed: u64,
    pub averaging: AveragingOrder,
    pub sic: SicConfig,
    /// Thresholds added to the built-in table (e.g. Singapore-protocol values).
    pub extra_thresholds: Vec<ThresholdEntry>,
    /// Where outputs are written. Not echoed or hashed, so reports do not depend on it.
    #[serde(skip_serializing)]
    pub output_dir: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BasisSelection {
    /// Every basis of the MUB family (index 0 is the logical OAM basis).
    pub mub_family: bool,
    /// The logical basis on its own; implied by `mub_family`.
    pub logical: bool,
    /// The angular basis where it is not already a family member.
    pub angular: bool,
    pub sic: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub n: usize,
    /// LG beam waist, m.
    pub w0: f64,
    /// Window side, m. Defaults to `8·w0·sqrt(max dimension)`.
    pub window: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChannelConfig {
    /// m^{−2/3}; zero disables turbulence.
    pub cn2: f64,
    /// m.
    pub length: f64,
    /// Receiver aperture diameter, m.
    pub aperture: f64,
    pub max_order: u32,
    pub include_m0: bool,
    pub normalization: RadiusNormalization,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AoSetting {
    Off,
    On,
}

impl std::fmt::Display for AoSetting {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            AoSetting::Off => "off",
            AoSetting::On => "on",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AoConfig {
    /// Zernike radial orders removed when AO is on.
    pub corrected_orders: u32,
    /// Settings evaluated on the same screens.
    pub settings: Vec<AoSetting>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SicConfig {
    pub seed: u64,
    pub search: SicSearchOptions,
    /// Fiducial cache file, read before searching and updated after.
    pub cache: Option<PathBuf>,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            dimensions: DEFAULT_DIMENSIONS.to_vec(),
            bases: BasisSelection::default(),
            wavelength: 633e-9,
            grid: GridConfig::default(),
            channel: ChannelConfig::default(),
            ao: AoConfig::default(),
            realizations: 100,
            z: 0.0,
            seed: 1,
            averaging: AveragingOrder::AverageThenNormalize,
            sic: SicConfig::default(),
            extra_thresholds: Vec::new(),
            output_dir: None,
        }
    }
}

impl Default for BasisSelection {
    fn default() -> Self {
        Self {
            mub_family: true,
            logical: true,
            angular: true,
            sic: false,
        }
    }
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            n: 512,
            w0: DEFAULT_W0,
            window: None,
        }
    }
}

/// Calibrated turbulence strength `10^{−14.7}` over the default link.
pub const DEFAULT_CN2: f64 = 1.9952623149688795e-15;

impl Default for ChannelConfig {
    fn default() -> Self {
        Self {
            cn2: DEFAULT_CN2,
            length: DEFAULT_LENGTH,
            aperture: DEFAULT_APERTURE,
            max_order: 7,
            include_m0: false,
            normalization: RadiusNormalization::Aperture,
        }
    }
}

/// Default link length, m.
pub const DEFAULT_LENGTH: f64 = 1000.0;
/// Default LG beam waist, m. With the aperture below, `cn2 = 10^{−14.7}` over the default
/// link puts the d = 2 OAM basis near a 9.6% QDER without AO.
pub const DEFAULT_W0: f64 = 0.034;
/// Default receiver aperture (eight waists), m.
pub const DEFAULT_APERTURE: f64 = 0.272;

impl Default for AoConfig {
    fn default() -> Self {
        Self {
            corrected_orders: 4,
            settings: vec![AoSetting::Off, AoSetting::On],
        }
    }
}

impl Default for SicConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            search: SicSearchOptions::default(),
            cache: None,
        }
    }
}

impl SimConfig {
    pub fn from_file(path: &Path) -> Result<Self, HarnessError> {
        let text = fs::read_to_string(path).map_err(|e| HarnessError::Io(path.display().to_string(), e))?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        serde_json::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))
    }

    pub fn max_dimension(&self) -> usize {
        self.dimensions.iter().copied().max().unwrap_or(2)
    }

    /// Fills in derived defaults and validates.
    pub fn resolved(&self) -> Result<SimConfig, HarnessError> {
        let mut c = self.clone();
        if c.dimensions.is_empty() {
            return Err(HarnessError::Config("no dimensions selected".into()));
        }
        c.dimensions.sort_unstable();
        c.dimensions.dedup();
        for &d in &c.dimensions {
            if !is_supported_dim(d) {
                return Err(HarnessError::Config(format!("dimension {d} has no supported basis family")));
            }
        }
        if !(c.bases.mub_family || c.bases.logical || c.bases.angular || c.bases.sic) {
            return Err(HarnessError::Config("no bases selected".into()));
        }
        if c.realizations == 0 {
            return Err(HarnessError::Config("realizations must be >= 1".into()));
        }
        if !(c.grid.w0 > 0.0 && c.grid.w0.is_finite()) {
            return Err(HarnessError::Config(format!("w0 = {}", c.grid.w0)));
        }
        if !(c.z >= 0.0 && c.z.is_finite()) {
            return Err(HarnessError::Config(format!("z = {}", c.z)));
        }
        if c.ao.settings.is_empty() {
            return Err(HarnessError::Config("ao.settings is empty".into()));
        }
        c.ao.settings.sort_unstable();
        c.ao.settings.dedup();
        let window = c
            .grid
            .window
            .unwrap_or(8.0 * c.grid.w0 * (c.max_dimension() as f64).sqrt());
        c.grid.window = Some(window);
        Grid::new(c.grid.n, window)?;
        c.turbulence_params().validate()?;
        c.threshold_table()?;
        Ok(c)
    }

    pub fn grid(&self) -> Result<Grid, HarnessError> {
        let window = self
            .grid
            .window
            .unwrap_or(8.0 * self.grid.w0 * (self.max_dimension() as f64).sqrt());
        Ok(Grid::new(self.grid.n, window)?)
    }

    pub fn turbulence_params(&self) -> TurbulenceParams {
        TurbulenceParams {
            cn2: self.channel.cn2,
            length: self.channel.length,
            wavelength: self.wavelength,
            aperture: self.channel.aperture,
            max_order: self.channel.max_order,
            include_m0: self.channel.include_m0,
            normalization: self.channel.normalization,
        }
    }

    pub fn threshold_table(&self) -> Result<ThresholdTable, HarnessError> {
        Ok(ThresholdTable::with_extra(&self.extra_thresholds)?)
    }

    /// SHA-256 of the compact JSON encoding of the resolved configuration.
    pub fn hash(&self) -> Result<String, HarnessError> {
        let resolved = self.resolved()?;
        let canonical = serde_json::to_string(&resolved)?;
        Ok(hex::encode(Sha256::digest(canonical.as_bytes())))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_takes_defaults() {
        let c = SimConfig::from_json("{}").unwrap();
        assert_eq!(c, SimConfig::default());
        let r = c.resolved().unwrap();
        let expected = 8.0 * DEFAULT_W0 * 8f64.sqrt();
        assert!((r.grid.window.unwrap() - expected).abs() < 1e-15);
    }

    #[test]
    fn echo_contains_every_resolved_default() {
        let r = SimConfig::default().resolved().unwrap();
        let v = serde_json::to_value(&r).unwrap();
        for key in [
            "dimensions", "bases", "wavelength", "grid", "channel", "ao", "realizations", "z", "seed", "averaging",
            "sic", "extra_thresholds",
        ] {
            assert!(v.get(key).is_some(), "{key}");
        }
        assert!(v["grid"]["window"].is_number());
        assert!(v.get("output_dir").is_none());
        // Echo parses back to the same resolved config.
        let back: SimConfig = serde_json::from_value(v).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn hash_ignores_output_dir_and_resolution() {
        let a = SimConfig::default();
        let b = SimConfig {
            output_dir: Some("/tmp/x".into()),
            ..SimConfig::default()
        };
        assert_eq!(a.hash().unwrap(), b.hash().unwrap());
        let c = a.resolved().unwrap();
        assert_eq!(a.hash().unwrap(), c.hash().unwrap());
        let d = SimConfig { seed: 2, ..SimConfig::default() };
        assert_ne!(a.hash().unwrap(), d.hash().unwrap());
        assert_eq!(a.hash().unwrap().len(), 64);
    }

    #[test]
    fn validation_errors() {
        assert!(SimConfig::from_json(r#"{"bogus": 1}"#).is_err());
        for bad in [
            SimConfig { dimensions: vec![7, 10], ..SimConfig::default() },
            SimConfig { realizations: 0, ..SimConfig::default() },
            SimConfig { dimensions: vec![], ..SimConfig::default() },
            SimConfig { grid: GridConfig { n: 100, ..GridConfig::default() }, ..SimConfig::default() },
            SimConfig { channel: ChannelConfig { cn2: -1.0, ..ChannelConfig::default() }, ..SimConfig::default() },
        ] {
            assert!(bad.resolved().is_err(), "{bad:?}");
        }
    }
}
