use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pulse::{DEFAULT_EIGEN_FLOOR, DEFAULT_MAX_TAPS, DEFAULT_THRESHOLD};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DetectorKind {
    Zf,
    Mlse,
    Sd,
    Sdse,
    Sdrse,
}

impl DetectorKind {
    pub const ALL: [DetectorKind; 5] = [Self::Zf, Self::Mlse, Self::Sd, Self::Sdse, Self::Sdrse];

    pub fn name(self) -> &'static str {
        match self {
            Self::Zf => "zf",
            Self::Mlse => "mlse",
            Self::Sd => "sd",
            Self::Sdse => "sdse",
            Self::Sdrse => "sdrse",
        }
    }
}

impl fmt::Display for DetectorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DetectorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown detector `{s}`")))
    }
}

/// Knobs shared by every simulated point.
#[derive(Debug, Clone, PartialEq)]
pub struct SimSettings {
    pub block_len: usize,
    pub min_errors: u64,
    pub max_bits: u64,
    pub threshold: f64,
    pub max_taps: usize,
    /// `0` keeps the exact truncated Gram matrix.
    pub eigen_floor: f64,
    pub draws: usize,
    pub seed: u64,
    /// Symbols dropped from each end of a block before counting errors.
    pub edge_discard: usize,
    pub record_timing: bool,
}

impl Default for SimSettings {
    fn default() -> Self {
        Self {
            block_len: 64,
            min_errors: 200,
            max_bits: 20_000_000,
            threshold: DEFAULT_THRESHOLD,
            max_taps: DEFAULT_MAX_TAPS,
            eigen_floor: DEFAULT_EIGEN_FLOOR,
            draws: 100,
            seed: 1,
            edge_discard: 0,
            record_timing: false,
        }
    }
}

impl SimSettings {
    pub fn validate(&self) -> Result<()> {
        if self.block_len == 0 {
            return Err(Error::Config("block_len must be at least 1".into()));
        }
        if self.min_errors == 0 {
            return Err(Error::Config("min_errors must be at least 1".into()));
        }
        if 2 * self.edge_discard >= self.block_len {
            return Err(Error::Config("edge_discard leaves no symbols to count".into()));
        }
        if self.draws == 0 {
            return Err(Error::Config("draws must be at least 1".into()));
        }
        if !(self.eigen_floor >= 0.0) {
            return Err(Error::Config("eigen_floor must be non-negative".into()));
        }
        Ok(())
    }

    /// Bits counted per block.
    pub fn counted_bits(&self) -> usize {
        self.block_len - 2 * self.edge_discard
    }
}

/// A BER sweep, as read from a config file.
///
/// Keys map one-to-one onto fields; unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub betas: Vec<f64>,
    pub taus: Vec<f64>,
    pub ebno_db: Vec<f64>,
    #[serde(default = "defaults::block_len")]
    pub block_len: usize,
    pub detectors: Vec<DetectorKind>,
    #[serde(default = "defaults::min_errors")]
    pub min_errors: u64,
    #[serde(default = "defaults::max_bits")]
    pub max_bits: u64,
    #[serde(default = "defaults::threshold")]
    pub threshold: f64,
    #[serde(default = "defaults::max_taps")]
    pub max_taps: usize,
    #[serde(default = "defaults::eigen_floor")]
    pub eigen_floor: f64,
    #[serde(default = "defaults::draws")]
    pub draws: usize,
    #[serde(default = "defaults::seed")]
    pub seed: u64,
    #[serde(default)]
    pub edge_discard: usize,
    #[serde(default)]
    pub record_timing: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_csv: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_plot: Option<PathBuf>,
}

mod defaults {
    use super::SimSettings;

    pub fn block_len() -> usize {
        SimSettings::default().block_len
    }
    pub fn min_errors() -> u64 {
        SimSettings::default().min_errors
    }
    pub fn max_bits() -> u64 {
        SimSettings::default().max_bits
    }
    pub fn threshold() -> f64 {
        SimSettings::default().threshold
    }
    pub fn max_taps() -> usize {
        SimSettings::default().max_taps
    }
    pub fn eigen_floor() -> f64 {
        SimSettings::default().eigen_floor
    }
    pub fn draws() -> usize {
        SimSettings::default().draws
    }
    pub fn seed() -> u64 {
        SimSettings::default().seed
    }
}

impl ExperimentConfig {
    pub fn new(betas: Vec<f64>, taus: Vec<f64>, ebno_db: Vec<f64>, detectors: Vec<DetectorKind>) -> Self {
        let s = SimSettings::default();
        Self {
            betas,
            taus,
            ebno_db,
            block_len: s.block_len,
            detectors,
            min_errors: s.min_errors,
            max_bits: s.max_bits,
            threshold: s.threshold,
            max_taps: s.max_taps,
            eigen_floor: s.eigen_floor,
            draws: s.draws,
            seed: s.seed,
            edge_discard: s.edge_discard,
            record_timing: s.record_timing,
            output_csv: None,
            output_plot: None,
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn settings(&self) -> SimSettings {
        SimSettings {
            block_len: self.block_len,
            min_errors: self.min_errors,
            max_bits: self.max_bits,
            threshold: self.threshold,
            max_taps: self.max_taps,
            eigen_floor: self.eigen_floor,
            draws: self.draws,
            seed: self.seed,
            edge_discard: self.edge_discard,
            record_timing: self.record_timing,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.betas.is_empty() || self.taus.is_empty() || self.ebno_db.is_empty() || self.detectors.is_empty() {
            return Err(Error::Config("betas, taus, ebno_db and detectors must be non-empty".into()));
        }
        if let Some(b) = self.betas.iter().find(|b| !(0.0..=1.0).contains(*b)) {
            return Err(Error::Config(format!("beta {b} outside [0, 1]")));
        }
        if let Some(t) = self.taus.iter().find(|t| !(**t > 0.0 && **t <= 1.0)) {
            return Err(Error::Config(format!("tau {t} outside (0, 1]")));
        }
        self.settings().validate()
    }
}
