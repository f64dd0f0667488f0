//! Seeded execution of one experiment with crash-safe, resumable output.
//!
//! Each experiment directory holds `records.csv` (rows appended one whole
//! realization at a time, in realization order), `MANIFEST` (rewritten
//! atomically after every flush) and, once complete, `summary.json` and
//! `summary.csv`. Because the CSV is always a prefix of the uninterrupted
//! output, a resumed run ends byte-identical to a clean one. Resume trusts
//! the CSV, so the MANIFEST count is only a lower bound and is refreshed at
//! most once per [`MANIFEST_INTERVAL`].

use std::fs::{File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use log::info;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use rayon::ThreadPool;
use serde::{Deserialize, Serialize};
use trbeam::channel::substream_seed;
use trbeam::dsp::DEFAULT_REG_EPSILON;
use trbeam::link::{composite_response, noise_variance, power_decomposition, simulate_ber_sweep, BerOptions};
use trbeam::metrics::sum_rate;
use trbeam::prefilter::build_prefilter;
use trbeam::ChannelSet64;

use crate::cache::{self, ChannelCache};
use crate::config::ExperimentConfig;
use crate::error::{HarnessError, Result};
use crate::records::{self, Record};
use crate::summary::{summarize, write_summary, SummaryReport};

pub const RECORDS_FILE: &str = "records.csv";
pub const MANIFEST_FILE: &str = "MANIFEST";
pub const MANIFEST_INTERVAL: Duration = Duration::from_secs(1);

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Incomplete,
    Complete,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub status: Status,
    pub experiment: String,
    pub fingerprint: String,
    pub realizations_done: u64,
    pub realizations_total: u64,
    pub records: String,
    pub tool: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub channel_cache: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl Manifest {
    pub fn load(dir: &Path) -> Result<Self> {
        let path = dir.join(MANIFEST_FILE);
        let text = std::fs::read_to_string(&path)
            .map_err(|e| HarnessError::Runtime(format!("cannot read {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| HarnessError::Runtime(format!("unparsable {}: {e}", path.display())))
    }

    fn store(&self, dir: &Path) -> Result<()> {
        let tmp = dir.join(format!("{MANIFEST_FILE}.tmp"));
        let text = toml::to_string(self).map_err(|e| HarnessError::Runtime(e.to_string()))?;
        std::fs::write(&tmp, text)?;
        std::fs::rename(tmp, dir.join(MANIFEST_FILE))?;
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct RunOptions {
    /// Root that experiment output paths are relative to.
    pub base: PathBuf,
    pub resume: bool,
}

#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub dir: PathBuf,
    /// Realizations found complete on disk and skipped.
    pub skipped: u64,
    pub summary: SummaryReport,
}

/// All rows of realization `k`: every design, every SNR point.
pub fn simulate_realization(cfg: &ExperimentConfig, h: &ChannelSet64, k: u64) -> Result<Vec<Record>> {
    let norm = cfg.rho * cfg.gamma;
    let sigmas = cfg
        .snr_grid_db
        .iter()
        .map(|&s| noise_variance(cfg.rho, cfg.gamma, s))
        .collect::<trbeam::Result<Vec<f64>>>()?;
    let options = BerOptions {
        rho: cfg.rho,
        ..BerOptions::default()
    };
    let mut rows = Vec::with_capacity(cfg.rows_per_realization());
    for (d, design) in cfg.designs().iter().enumerate() {
        let p = build_prefilter(design.technique, h, design.prefilter_len, DEFAULT_REG_EPSILON)?;
        let decomp = power_decomposition(&composite_response(&p, h)?, cfg.rho);
        let base = Record {
            experiment: cfg.name.clone(),
            technique: design.technique,
            scenario: cfg.scenario,
            antennas: cfg.antennas,
            users: cfg.users,
            taps: cfg.taps,
            prefilter_len: p.len(),
            correlated: cfg.correlated,
            snr_db: None,
            realization: k,
            p_s: decomp.mean_signal() / norm,
            p_isi: decomp.mean_isi() / norm,
            p_iui: decomp.mean_iui() / norm,
            errors: None,
            bits: None,
            sum_rate: None,
        };
        if cfg.snr_grid_db.is_empty() {
            rows.push(base);
            continue;
        }
        let ber = if cfg.ber {
            let mut rng = ChaCha20Rng::seed_from_u64(substream_seed(h.seed, d as u64 + 1));
            Some(simulate_ber_sweep(&p, h, &cfg.snr_grid_db, cfg.num_symbols, &options, &mut rng)?)
        } else {
            None
        };
        for (i, (&snr, &s2)) in cfg.snr_grid_db.iter().zip(&sigmas).enumerate() {
            let mut row = base.clone();
            row.snr_db = Some(snr);
            row.sum_rate = Some(sum_rate(&decomp, s2)?);
            if let Some(b) = &ber {
                row.errors = Some(b[i].total_errors());
                row.bits = Some(b[i].total_bits());
            }
            rows.push(row);
        }
    }
    Ok(rows)
}

/// Number of leading realizations that are fully and cleanly on disk, and
/// the byte length they occupy (header included).
fn completed_prefix(cfg: &ExperimentConfig, bytes: &[u8]) -> (u64, u64) {
    let header = records::header();
    let header_len = header.len() as u64 + 1;
    if !bytes.starts_with(format!("{header}\n").as_bytes()) {
        return (0, 0);
    }
    let per = cfg.rows_per_realization();
    let mut reader = csv::Reader::from_reader(bytes);
    let (mut done, mut end) = (0u64, header_len);
    let mut in_group = 0usize;
    let mut iter = reader.deserialize::<Record>();
    while let Some(Ok(row)) = iter.next() {
        let pos = iter.reader().position().byte();
        if row.experiment != cfg.name || row.realization != done || pos == 0 || bytes[pos as usize - 1] != b'\n' {
            break;
        }
        in_group += 1;
        if in_group == per {
            done += 1;
            end = pos;
            in_group = 0;
            if done == cfg.num_realizations {
                break;
            }
        }
    }
    (done, end)
}

/// Opens the records file for appending, truncated to its last complete
/// realization when resuming. Returns the writer and the realizations kept.
fn open_records(cfg: &ExperimentConfig, dir: &Path, resume: bool) -> Result<(csv::Writer<File>, u64)> {
    let path = dir.join(RECORDS_FILE);
    if resume && path.exists() {
        let manifest = Manifest::load(dir)?;
        if manifest.fingerprint != cfg.fingerprint() {
            return Err(HarnessError::Config(format!(
                "{} was produced by a different configuration of `{}`; rerun without --resume",
                dir.display(),
                cfg.name
            )));
        }
        let bytes = std::fs::read(&path)?;
        let (done, end) = completed_prefix(cfg, &bytes);
        if end > 0 {
            let file = OpenOptions::new().write(true).open(&path)?;
            file.set_len(end)?;
            drop(file);
            let file = OpenOptions::new().append(true).open(&path)?;
            return Ok((csv::WriterBuilder::new().has_headers(false).from_writer(file), done));
        }
    }
    let mut file = File::create(&path)?;
    writeln!(file, "{}", records::header())?;
    Ok((csv::WriterBuilder::new().has_headers(false).from_writer(file), 0))
}

/// Runs (or resumes) one experiment on `pool`.
pub fn run_experiment(cfg: &ExperimentConfig, opts: &RunOptions, pool: &ThreadPool) -> Result<RunOutcome> {
    cfg.validate()?;
    let dir = cfg.output_dir(&opts.base);
    std::fs::create_dir_all(&dir)?;
    let cache_path = cfg.cache_path(&opts.base);
    let cache = ChannelCache::open(cfg, &cache_path)?;
    let (mut writer, skipped) = open_records(cfg, &dir, opts.resume)?;
    let mut manifest = Manifest {
        status: Status::Incomplete,
        experiment: cfg.name.clone(),
        fingerprint: cfg.fingerprint(),
        realizations_done: skipped,
        realizations_total: cfg.num_realizations,
        records: RECORDS_FILE.into(),
        tool: format!("trbeam {}", env!("CARGO_PKG_VERSION")),
        channel_cache: cache.as_ref().map(|_| cache_path.clone()),
        error: None,
    };
    manifest.store(&dir)?;
    let mut stored = Instant::now();
    if skipped > 0 {
        info!("{}: resuming after {skipped} realizations", cfg.name);
    }

    let chunk = (pool.current_num_threads() * 4) as u64;
    let mut k = skipped;
    while k < cfg.num_realizations {
        let end = (k + chunk).min(cfg.num_realizations);
        let batch: Result<Vec<Vec<Record>>> = pool.install(|| {
            (k..end)
                .into_par_iter()
                .map(|r| {
                    let h = match &cache {
                        Some(c) => c.get(r)?,
                        None => cache::generate(cfg, r)?,
                    };
                    simulate_realization(cfg, &h, r)
                })
                .collect()
        });
        let batch = match batch {
            Ok(b) => b,
            Err(e) => {
                manifest.error = Some(e.to_string());
                manifest.store(&dir)?;
                return Err(e);
            }
        };
        for row in batch.iter().flatten() {
            writer.serialize(row)?;
        }
        writer.flush()?;
        manifest.realizations_done = end;
        if stored.elapsed() >= MANIFEST_INTERVAL {
            manifest.store(&dir)?;
            stored = Instant::now();
        }
        info!("{}: {end}/{} realizations", cfg.name, cfg.num_realizations);
        k = end;
    }
    drop(writer);

    let rows: Vec<Record> = csv::Reader::from_path(dir.join(RECORDS_FILE))?
        .deserialize()
        .collect::<std::result::Result<_, _>>()?;
    let summary = SummaryReport {
        experiment: cfg.name.clone(),
        fingerprint: cfg.fingerprint(),
        cells: summarize(&rows)?,
    };
    write_summary(&dir, &summary)?;
    manifest.status = Status::Complete;
    manifest.store(&dir)?;
    Ok(RunOutcome { dir, skipped, summary })
}
