//! Acceptance self-test: the smoke preset end to end plus the invariants
//! that must hold on every run.

use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use log::info;
use rayon::ThreadPool;
use trbeam::dsp::DEFAULT_REG_EPSILON;
use trbeam::prefilter::{build_prefilter, intr_prefilter, intr_spectra, prefilter_energy, tr_prefilter};
use trbeam::C64;

use crate::cache::{self, write_cache};
use crate::config::ExperimentConfig;
use crate::error::{HarnessError, Result};
use crate::presets::preset;
use crate::runner::{run_experiment, RunOptions, RECORDS_FILE};

/// Worst accepted `|<H_n'(f), P_n(f)>| / |H_n'(f)|` for INTR.
const NULLING_TOLERANCE: f64 = 1e-10;

/// Wall-clock budget for the whole self-test.
pub const BUDGET_SECS: f64 = 10.0;

fn check(ok: bool, what: impl FnOnce() -> String) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(HarnessError::SelfTest(what()))
    }
}

fn pool(threads: usize) -> Result<ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| HarnessError::Runtime(e.to_string()))
}

fn read(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|e| HarnessError::SelfTest(format!("missing {}: {e}", path.display())))
}

struct Scratch(PathBuf);

impl Drop for Scratch {
    fn drop(&mut self) {
        let _ = std::fs::remove_dir_all(&self.0);
    }
}

/// Runs every check under a scratch directory and returns the elapsed time.
pub fn selftest(workers: usize) -> Result<f64> {
    let start = Instant::now();
    let nanos = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_nanos());
    let scratch = Scratch(std::env::temp_dir().join(format!("trbeam-selftest-{}-{nanos}", std::process::id())));
    std::fs::create_dir_all(&scratch.0)?;
    let smoke = preset("smoke")?;

    for cfg in &smoke.experiments {
        invariants(cfg)?;
        reproducibility(cfg, &scratch.0, workers.max(2))?;
    }
    let elapsed = start.elapsed().as_secs_f64();
    check(elapsed < BUDGET_SECS, || format!("self-test took {elapsed:.1} s, budget {BUDGET_SECS} s"))?;
    Ok(elapsed)
}

/// Nulling, N = 1 reduction and unit energy on every smoke realization.
fn invariants(cfg: &ExperimentConfig) -> Result<()> {
    for k in 0..cfg.num_realizations {
        let h = cache::generate(cfg, k)?;
        for design in cfg.designs() {
            let p = build_prefilter(design.technique, &h, design.prefilter_len, DEFAULT_REG_EPSILON)?;
            let e = prefilter_energy(&p);
            check((e - 1.0).abs() < 1e-12, || {
                format!("{} realization {k}: {} pre-filter energy {e}", cfg.name, design.technique)
            })?;
        }
        for lp in cfg.lengths() {
            let s = intr_spectra(&h, lp, DEFAULT_REG_EPSILON)?;
            let mut worst: f64 = 0.0;
            for f in 0..s.num_bins {
                for victim in 0..cfg.users {
                    let hv = s.channel_vector(f, victim);
                    let norm = hv.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
                    for src in (0..cfg.users).filter(|&n| n != victim) {
                        let ip: C64 = hv.iter().zip(s.prefilter_vector(f, src)).map(|(a, b)| b.conj() * a).sum();
                        worst = worst.max(ip.norm() / norm);
                    }
                }
            }
            check(worst < NULLING_TOLERANCE && s.regularized_bins == 0, || {
                format!("{} realization {k}: INTR leakage {worst:.2e}, {} regularized bins", cfg.name, s.regularized_bins)
            })?;
        }
    }
    let mut single = cfg.clone();
    single.users = 1;
    let h = cache::generate(&single, 0)?;
    let (tr, intr) = (tr_prefilter(&h)?, intr_prefilter(&h, cfg.taps, DEFAULT_REG_EPSILON)?);
    let same = tr.taps().len() == intr.taps().len()
        && tr
            .taps()
            .iter()
            .zip(intr.taps())
            .all(|(a, b)| a.re.to_bits() == b.re.to_bits() && a.im.to_bits() == b.im.to_bits());
    check(same, || "single-user INTR differs from TR".into())
}

/// Worker-count independence, resume after a torn write, cache reuse and
/// BER sanity, all on full runs of `cfg`.
fn reproducibility(cfg: &ExperimentConfig, scratch: &Path, workers: usize) -> Result<()> {
    let run = |base: &Path, threads: usize, resume: bool| -> Result<PathBuf> {
        let opts = RunOptions {
            base: base.to_path_buf(),
            resume,
        };
        Ok(run_experiment(cfg, &opts, &pool(threads)?)?.dir)
    };
    let serial = run(&scratch.join("serial"), 1, false)?;
    let parallel = run(&scratch.join("parallel"), workers, false)?;
    let reference = read(&serial.join(RECORDS_FILE))?;
    let summary = read(&serial.join("summary.json"))?;
    check(reference == read(&parallel.join(RECORDS_FILE))?, || {
        format!("{}: records differ between 1 and {workers} workers", cfg.name)
    })?;

    let torn = parallel.join(RECORDS_FILE);
    std::fs::write(&torn, &reference[..reference.len() * 3 / 5])?;
    run(&scratch.join("parallel"), workers, true)?;
    check(read(&torn)? == reference && read(&parallel.join("summary.json"))? == summary, || {
        format!("{}: resumed run differs from uninterrupted run", cfg.name)
    })?;

    let cached_base = scratch.join("cached");
    let cache_path = cfg.cache_path(&cached_base);
    std::fs::create_dir_all(cache_path.parent().unwrap_or(&cached_base))?;
    write_cache(cfg, &cache_path, &pool(workers)?)?;
    let cached = run(&cached_base, workers, false)?;
    check(read(&cached.join(RECORDS_FILE))? == reference, || {
        format!("{}: cached channels give different records", cfg.name)
    })?;

    let report = crate::summary::load_summary(&serial.join("summary.json"))?;
    for c in &report.cells {
        if let (Some(ber), Some((lo, hi))) = (c.ber, c.ber_interval) {
            check((0.0..=1.0).contains(&ber) && lo <= ber && ber <= hi, || {
                format!("{}: BER {ber} outside [{lo}, {hi}]", c.key)
            })?;
        }
    }
    info!("{}: reproducibility checks passed", cfg.name);
    Ok(())
}
