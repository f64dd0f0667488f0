//! Channel caches: one record per realization in the core binary format,
//! read back by realization index.

use std::fs::File;
use std::io::{BufReader, BufWriter, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use rayon::ThreadPool;
use trbeam::channel::{generate_channel_set, read_channel_set, sidecar_path, substream_seed, write_channel_set, ChannelSidecar};
use trbeam::{ArrayGeometry, ChannelSet64};

use crate::config::ExperimentConfig;
use crate::error::{HarnessError, Result};

/// Draws realization `k` of an experiment from substream `(master_seed, k)`.
pub fn generate(cfg: &ExperimentConfig, k: u64) -> Result<ChannelSet64> {
    let array = ArrayGeometry::for_elements(cfg.antennas)?;
    Ok(generate_channel_set(
        &cfg.scenario_params(),
        &array,
        cfg.users,
        cfg.correlated,
        substream_seed(cfg.master_seed, k),
    )?)
}

fn expected_sidecar(cfg: &ExperimentConfig) -> Result<ChannelSidecar> {
    Ok(ChannelSidecar {
        scenario: cfg.scenario_params(),
        correlated: cfg.correlated,
        num_antennas: cfg.antennas,
        num_users: cfg.users,
        array: Some(ArrayGeometry::for_elements(cfg.antennas)?),
    })
}

/// Writes all realizations of `cfg` to `path`, generating `chunk` at a time
/// on `pool` and appending in realization order.
pub fn write_cache(cfg: &ExperimentConfig, path: &Path, pool: &ThreadPool) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    let sidecar = expected_sidecar(cfg)?;
    let mut w = BufWriter::new(File::create(path)?);
    let chunk = (pool.current_num_threads() * 4) as u64;
    let mut k = 0;
    while k < cfg.num_realizations {
        let end = (k + chunk).min(cfg.num_realizations);
        let sets: Vec<ChannelSet64> = pool.install(|| (k..end).into_par_iter().map(|r| generate(cfg, r)).collect::<Result<_>>())?;
        for set in &sets {
            write_channel_set(&mut w, set)?;
        }
        k = end;
    }
    w.flush()?;
    std::fs::write(sidecar_path(path), serde_json::to_vec_pretty(&sidecar)?)?;
    Ok(())
}

/// Read-only view of a cache checked against an experiment.
#[derive(Debug)]
pub struct ChannelCache {
    path: PathBuf,
    sidecar: ChannelSidecar,
    master_seed: u64,
}

impl ChannelCache {
    /// `Ok(None)` when no cache exists at `path`. A cache built for other
    /// parameters or with too few realizations is refused.
    pub fn open(cfg: &ExperimentConfig, path: &Path) -> Result<Option<Self>> {
        if !path.exists() {
            return Ok(None);
        }
        let sidecar: ChannelSidecar = serde_json::from_slice(&std::fs::read(sidecar_path(path))?)?;
        sidecar.check_compatible(&expected_sidecar(cfg)?).map_err(|e| {
            HarnessError::Runtime(format!("refusing channel cache {}: {e}", path.display()))
        })?;
        let available = std::fs::metadata(path)?.len() / sidecar.record_len();
        if available < cfg.num_realizations {
            return Err(HarnessError::Runtime(format!(
                "channel cache {} holds {available} realizations, experiment `{}` needs {}",
                path.display(),
                cfg.name,
                cfg.num_realizations
            )));
        }
        Ok(Some(Self {
            path: path.to_path_buf(),
            sidecar,
            master_seed: cfg.master_seed,
        }))
    }

    pub fn get(&self, k: u64) -> Result<ChannelSet64> {
        let mut r = BufReader::new(File::open(&self.path)?);
        r.seek(SeekFrom::Start(k * self.sidecar.record_len()))?;
        let set: ChannelSet64 = read_channel_set(&mut r, &self.sidecar)?
            .ok_or_else(|| HarnessError::Runtime(format!("channel cache ends before realization {k}")))?;
        let expected = substream_seed(self.master_seed, k);
        if set.seed != expected {
            return Err(HarnessError::Runtime(format!(
                "refusing channel cache {}: realization {k} was drawn with seed {:#x}, expected {expected:#x}",
                self.path.display(),
                set.seed
            )));
        }
        Ok(set)
    }
}
