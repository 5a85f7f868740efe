//! Command-line driver: run one config, sweep a directory of them, print
//! the operator check suite, or emit a catalog preset.
//!
//! Exit codes: 0 success, 2 instability or boundary contamination, 3 config
//! errors, 1 anything else.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use benkdv::config::ExperimentConfig;
use benkdv::error::Error;
use benkdv::experiment::{self, SweepJob};

#[derive(Parser)]
#[command(name = "benkdv", version, about = "Spectral solver for higher-order dispersive models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment config into a run directory
    Run {
        /// Path of the JSON config
        config: PathBuf,
        /// Replace the config's seed
        #[arg(long)]
        seed: Option<u64>,
        /// Run directory; defaults to <output dir>/run-<config hash>
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run every *.json config under a directory and aggregate the results
    Sweep {
        /// Directory holding the configs
        dir: PathBuf,
        /// Worker threads
        #[arg(long, default_value_t = 1)]
        workers: usize,
        /// Sweep output directory; defaults to <dir>/sweep
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the operator check suite and print one line per check
    Check,
    /// Write a catalog config to a file
    Preset {
        /// One of the names listed by `preset --help` on error
        name: String,
        /// Destination path for the JSON config
        #[arg(long)]
        out: PathBuf,
    },
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::Config(_)
        | Error::InvalidGrid(_)
        | Error::InvalidParams(_)
        | Error::InvalidArgument(_)
        | Error::InvalidWeight(_)
        | Error::InvalidInitialData(_)
        | Error::SizeMismatch { .. }
        | Error::NonMeanZero
        | Error::WindowExitsDomain { .. } => 3,
        Error::Instability { .. } | Error::BoundaryContamination { .. } => 2,
        Error::PicardDiverged { .. } | Error::Io(_) => 1,
    }
}

fn run_command(command: Command) -> Result<u8, Error> {
    match command {
        Command::Run { config, seed, out } => {
            let mut config = ExperimentConfig::load(&config)?;
            if let Some(seed) = seed {
                config.seed = seed;
            }
            let out_dir = out.unwrap_or_else(|| {
                config
                    .resolve_output_dir()
                    .join(format!("run-{:016x}", experiment::config_hash(&config)))
            });
            let outcome = experiment::run_experiment(&config, &out_dir)?;
            println!("{} -> {}", outcome.status.label(), outcome.dir.display());
            Ok(outcome.status.exit_code())
        }
        Command::Sweep { dir, workers, out } => {
            let out_dir = out.unwrap_or_else(|| dir.join("sweep"));
            let jobs = collect_jobs(&dir)?;
            let aggregate = experiment::sweep(&jobs, workers, &out_dir)?;
            println!("{} runs -> {}", jobs.len(), aggregate.display());
            Ok(0)
        }
        Command::Check => {
            let entries = benkdv::opcheck::run_suite();
            let mut all_pass = true;
            for entry in &entries {
                let verdict = if entry.pass { "PASS" } else { "FAIL" };
                println!("{verdict} {} ({})", entry.name, entry.detail);
                all_pass &= entry.pass;
            }
            Ok(if all_pass { 0 } else { 1 })
        }
        Command::Preset { name, out } => {
            let Some(config) = experiment::preset(&name) else {
                return Err(Error::Config(format!(
                    "unknown preset {name}; available: {}",
                    experiment::PRESET_NAMES.join(", ")
                )));
            };
            std::fs::write(&out, config.to_json())?;
            println!("wrote {}", out.display());
            Ok(0)
        }
    }
}

/// Every *.json in the directory, sorted by file name so job order (and the
/// aggregate table) is independent of readdir order.
fn collect_jobs(dir: &PathBuf) -> Result<Vec<SweepJob>, Error> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|path| path.extension().is_some_and(|ext| ext == "json"))
        .collect();
    paths.sort();
    Ok(paths
        .into_iter()
        .map(|path| {
            let name = path
                .file_stem()
                .map(|stem| stem.to_string_lossy().into_owned())
                .unwrap_or_else(|| "config".into());
            let config = ExperimentConfig::load(&path).map_err(|err| err.to_string());
            SweepJob { name, config }
        })
        .collect())
}

fn main() -> ExitCode {
    match run_command(Cli::parse().command) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}
