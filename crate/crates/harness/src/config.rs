//! Experiment configuration: a TOML file holding one `[[experiment]]`
//! table per experiment.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Deserializer, Serialize};
use sha2::{Digest, Sha256};
use trbeam::channel::build_pdp;
use trbeam::{ArrayGeometry, Scenario, ScenarioParams, Technique};

use crate::error::{HarnessError, Result};

pub const DEFAULT_TAPS: usize = 60;
pub const DEFAULT_SYMBOLS: usize = 100_000;
pub const DEFAULT_REALIZATIONS: u64 = 500;
pub const DEFAULT_SEED: u64 = 1;

fn default_taps() -> usize {
    DEFAULT_TAPS
}
fn default_symbols() -> usize {
    DEFAULT_SYMBOLS
}
fn default_realizations() -> u64 {
    DEFAULT_REALIZATIONS
}
fn default_seed() -> u64 {
    DEFAULT_SEED
}
fn default_one() -> f64 {
    1.0
}
fn default_true() -> bool {
    true
}

/// Accepts `L_p = 90` as well as `L_p = [60, 90]`.
fn one_or_many<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<usize>, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum OneOrMany {
        One(usize),
        Many(Vec<usize>),
    }
    Ok(match OneOrMany::deserialize(d)? {
        OneOrMany::One(v) => vec![v],
        OneOrMany::Many(v) => v,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Also the default output subdirectory.
    pub name: String,
    pub scenario: Scenario,
    #[serde(rename = "M")]
    pub antennas: usize,
    #[serde(rename = "N")]
    pub users: usize,
    #[serde(rename = "L", default = "default_taps")]
    pub taps: usize,
    /// Pre-filter lengths swept for ETR and INTR; empty means `[L]`.
    #[serde(rename = "L_p", default, deserialize_with = "one_or_many")]
    pub prefilter_len: Vec<usize>,
    /// Fixed ETR equalizer length; overrides the `L_p` sweep for ETR.
    #[serde(rename = "L_E", default, skip_serializing_if = "Option::is_none")]
    pub eq_len: Option<usize>,
    pub techniques: Vec<Technique>,
    pub correlated: bool,
    #[serde(default)]
    pub snr_grid_db: Vec<f64>,
    /// Simulate BER at every SNR point; otherwise only sum rates.
    #[serde(default = "default_true")]
    pub ber: bool,
    /// BPSK symbols per user and realization.
    #[serde(default = "default_symbols")]
    pub num_symbols: usize,
    #[serde(default = "default_realizations")]
    pub num_realizations: u64,
    #[serde(default = "default_seed")]
    pub master_seed: u64,
    /// Output directory, relative to `--out`; defaults to `name`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_path: Option<PathBuf>,
    /// Channel cache file, relative to `--out`; defaults to
    /// `<output>/channels.trch`. Experiments naming the same file share it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub channel_cache: Option<PathBuf>,
    #[serde(default = "default_one")]
    pub rho: f64,
    #[serde(default = "default_one")]
    pub gamma: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample_period_ns: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub direct_fraction: Option<f64>,
}

/// One pre-filter to build per realization.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Design {
    pub technique: Technique,
    pub prefilter_len: usize,
}

impl ExperimentConfig {
    pub fn scenario_params(&self) -> ScenarioParams {
        let mut s = ScenarioParams::new(self.scenario).with_taps(self.taps);
        s.gamma = self.gamma;
        if let Some(ts) = self.sample_period_ns {
            s.sample_period_ns = ts;
        }
        if let Some(beta) = self.direct_fraction {
            s.direct_fraction = beta;
        }
        s
    }

    pub fn lengths(&self) -> Vec<usize> {
        if self.prefilter_len.is_empty() {
            vec![self.taps]
        } else {
            self.prefilter_len.clone()
        }
    }

    /// Techniques in config order; TR once at `L`, ETR and INTR once per `L_p`.
    pub fn designs(&self) -> Vec<Design> {
        let mut out = Vec::new();
        for &technique in &self.techniques {
            let lengths = match (technique, self.eq_len) {
                (Technique::Tr, _) => vec![self.taps],
                (Technique::Etr, Some(le)) => vec![self.taps + le - 1],
                _ => self.lengths(),
            };
            out.extend(lengths.into_iter().map(|prefilter_len| Design { technique, prefilter_len }));
        }
        out
    }

    /// Rows written per realization.
    pub fn rows_per_realization(&self) -> usize {
        self.designs().len() * self.snr_grid_db.len().max(1)
    }

    pub fn output_dir(&self, base: &Path) -> PathBuf {
        base.join(self.output_path.as_deref().unwrap_or(Path::new(&self.name)))
    }

    pub fn cache_path(&self, base: &Path) -> PathBuf {
        match &self.channel_cache {
            Some(p) => base.join(p),
            None => self.output_dir(base).join("channels.trch"),
        }
    }

    /// SHA-256 of the canonical TOML form; ties result files to the config.
    pub fn fingerprint(&self) -> String {
        let text = toml::to_string(self).expect("config serializes");
        format!("{:x}", Sha256::digest(text.as_bytes()))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(HarnessError::Config(format!("experiment `{}`: {msg}", self.name)));
        if self.name.is_empty()
            || !self.name.chars().all(|c| c.is_ascii_alphanumeric() || "-_.".contains(c))
            || self.name.starts_with('.')
        {
            return bad("name must be non-empty and use only [A-Za-z0-9_.-]".into());
        }
        if self.antennas == 0 || self.users == 0 || self.taps == 0 {
            return bad("M, N and L must be positive".into());
        }
        ArrayGeometry::for_elements(self.antennas)?;
        if self.techniques.is_empty() {
            return bad("at least one technique is required".into());
        }
        if self.techniques.iter().collect::<BTreeSet<_>>().len() != self.techniques.len() {
            return bad("techniques must be unique".into());
        }
        let lengths = self.lengths();
        if lengths.iter().collect::<BTreeSet<_>>().len() != lengths.len() {
            return bad("L_p values must be unique".into());
        }
        let sweeps = self.techniques.iter().any(|t| *t != Technique::Tr);
        if sweeps && lengths.iter().any(|&lp| lp < self.taps) {
            return bad(format!("every L_p must be at least L = {}", self.taps));
        }
        if self.eq_len == Some(0) {
            return bad("L_E must be positive".into());
        }
        if self.techniques.contains(&Technique::Intr) && self.users > self.antennas {
            return bad(format!("INTR cannot serve {} users with {} antennas", self.users, self.antennas));
        }
        if self.num_realizations == 0 {
            return bad("num_realizations must be positive".into());
        }
        if self.snr_grid_db.iter().any(|s| !s.is_finite()) {
            return bad("SNR values must be finite".into());
        }
        if self.snr_grid_db.iter().collect::<Vec<_>>().windows(2).any(|w| w[1] <= w[0]) {
            return bad("snr_grid_db must be strictly increasing".into());
        }
        if self.ber && !self.snr_grid_db.is_empty() && self.num_symbols < 1000 {
            return bad("num_symbols must be at least 1000".into());
        }
        if !(self.rho > 0.0) || !self.rho.is_finite() {
            return bad("rho must be positive".into());
        }
        if self.master_seed > i64::MAX as u64 {
            return bad("master_seed must fit in a TOML integer (< 2^63)".into());
        }
        build_pdp(&self.scenario_params()).map_err(|e| HarnessError::Config(format!("experiment `{}`: {e}", self.name)))?;
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(rename = "experiment")]
    pub experiments: Vec<ExperimentConfig>,
}

impl ConfigFile {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ConfigFile = toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.experiments.is_empty() {
            return Err(HarnessError::Config("no [[experiment]] entries".into()));
        }
        let mut names = BTreeSet::new();
        let mut dirs = BTreeSet::new();
        for e in &self.experiments {
            e.validate()?;
            if !names.insert(&e.name) {
                return Err(HarnessError::Config(format!("duplicate experiment name `{}`", e.name)));
            }
            if !dirs.insert(e.output_dir(Path::new(""))) {
                return Err(HarnessError::Config(format!("experiment `{}` reuses another output path", e.name)));
            }
        }
        Ok(())
    }

    /// Replaces every experiment's master seed.
    pub fn with_seed(mut self, seed: u64) -> Result<Self> {
        for e in &mut self.experiments {
            e.master_seed = seed;
        }
        self.validate()?;
        Ok(self)
    }
}
