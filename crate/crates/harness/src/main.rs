use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use log::{error, info};
use trbeam_harness::cache::write_cache;
use trbeam_harness::plot::{emit_plot, Figure};
use trbeam_harness::presets::preset;
use trbeam_harness::runner::{run_experiment, RunOptions};
use trbeam_harness::selftest::selftest;
use trbeam_harness::{ConfigFile, HarnessError, Result};

/// Reproducible time-reversal beamforming experiments.
#[derive(Debug, Parser)]
#[command(name = "trbeam", version)]
struct Cli {
    /// Experiment file (TOML, one or more [[experiment]] tables).
    #[arg(long, global = true, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Built-in experiment set: smoke, table2, fig5, fig6, fig7 or fig8.
    #[arg(long, global = true)]
    preset: Option<String>,
    /// Overrides master_seed of every experiment.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: available cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Continue an interrupted run, keeping completed realizations.
    #[arg(long, global = true)]
    resume: bool,
    /// Output root; each experiment writes to its own subdirectory.
    #[arg(long, global = true, default_value = "results")]
    out: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate and store the channel realizations of each experiment.
    GenChannels,
    /// Run experiments and write records, summaries and manifests.
    Run,
    /// Reshape summaries under --out into a plot-ready CSV.
    EmitPlot {
        /// fig5a, fig5b, fig6, fig7a, fig7b or fig8.
        figure: String,
    },
    /// Smoke run plus invariant checks; exits 3 on failure.
    Selftest,
}

impl Cli {
    fn experiments(&self) -> Result<ConfigFile> {
        let file = match (&self.config, &self.preset) {
            (Some(path), _) => ConfigFile::load(path)?,
            (None, Some(name)) => preset(name)?,
            (None, None) => return Err(HarnessError::Config("either --config or --preset is required".into())),
        };
        let file = match self.seed {
            Some(seed) => file.with_seed(seed)?,
            None => file,
        };
        file.validate()?;
        Ok(file)
    }

    fn workers(&self) -> Result<usize> {
        match self.workers {
            Some(0) => Err(HarnessError::Config("--workers must be at least 1".into())),
            Some(n) => Ok(n),
            None => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
        }
    }

    fn pool(&self) -> Result<rayon::ThreadPool> {
        rayon::ThreadPoolBuilder::new()
            .num_threads(self.workers()?)
            .build()
            .map_err(|e| HarnessError::Runtime(e.to_string()))
    }
}

fn execute(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::GenChannels => {
            let file = cli.experiments()?;
            let pool = cli.pool()?;
            for cfg in &file.experiments {
                let path = cfg.cache_path(&cli.out);
                if let Some(dir) = path.parent() {
                    std::fs::create_dir_all(dir)?;
                }
                write_cache(cfg, &path, &pool)?;
                info!("{}: wrote {} realizations to {}", cfg.name, cfg.num_realizations, path.display());
                println!("{}", path.display());
            }
        }
        Command::Run => {
            let file = cli.experiments()?;
            let pool = cli.pool()?;
            let opts = RunOptions {
                base: cli.out.clone(),
                resume: cli.resume,
            };
            for cfg in &file.experiments {
                let outcome = run_experiment(cfg, &opts, &pool)?;
                println!("{}", outcome.dir.display());
            }
        }
        Command::EmitPlot { figure } => {
            let figure: Figure = figure.parse()?;
            println!("{}", emit_plot(figure, &cli.out)?.display());
        }
        Command::Selftest => {
            let elapsed = selftest(cli.workers()?)?;
            println!("selftest passed in {elapsed:.2} s");
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            error!("{e}");
            ExitCode::from(e.exit_code())
        }
    }
}
