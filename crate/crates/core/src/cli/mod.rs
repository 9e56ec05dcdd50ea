//! Command-line front end: argument parsing, configuration files and
//! experiment runs. The `fdhap` binary only calls [`main_with_args`].

pub mod config;
pub mod run;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub use config::{validate_config, ExperimentConfig, ExperimentKind};
pub use run::{output_dir, run, RunReport};

use crate::error::{Error, Result};

/// Environment variable that caps the worker thread count.
pub const THREADS_ENV: &str = "FDHAP_THREADS";

#[derive(Debug, Parser)]
#[command(name = "fdhap", version, about = "Full-duplex HAP rate and beamforming experiments")]
pub struct Args {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, clap::Args)]
pub struct RunFlags {
    /// TOML configuration; defaults are used for anything missing.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Overrides the trial count of the experiment.
    #[arg(long)]
    pub trials: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Runs the experiment named by the configuration's `experiment` key.
    Run(RunFlags),
    /// Uplink/downlink sum-rate frontiers, optimized and MRT baseline.
    RateRegion(RunFlags),
    /// Uplink sum-rate versus N_t under power scaling.
    UlRateVsAntennas(RunFlags),
    /// Closed-form bounds and integrals against Monte Carlo.
    ValidateBounds(RunFlags),
    /// One channel draw through the optimizer.
    OptimizeOnce(RunFlags),
    /// Parse and check a configuration file without running it.
    CheckConfig {
        #[arg(long)]
        config: PathBuf,
    },
}

/// Loads the configuration and applies command-line overrides.
pub fn resolve(kind: ExperimentKind, flags: &RunFlags) -> Result<ExperimentConfig> {
    let mut cfg = match &flags.config {
        Some(path) => validate_config(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = flags.seed {
        cfg.seed = seed;
    }
    if let Some(n) = flags.trials {
        match kind {
            ExperimentKind::RateRegion => cfg.trials.region = n,
            _ => cfg.trials.rate = n,
        }
    }
    cfg.experiment = Some(kind);
    cfg.validate()?;
    Ok(cfg)
}

fn configure_threads() -> Result<()> {
    let Ok(v) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Error::config(THREADS_ENV, format!("expected a positive integer, got {v:?}")))?;
    // a pool may already exist when called twice in one process
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

fn dispatch(args: Args) -> Result<()> {
    configure_threads()?;
    let (kind, flags) = match args.command {
        Command::Run(f) => {
            let named = match &f.config {
                Some(path) => validate_config(path)?.experiment,
                None => None,
            };
            let kind = named.ok_or_else(|| Error::config("experiment", "`run` needs a config that names the experiment"))?;
            (kind, f)
        }
        Command::RateRegion(f) => (ExperimentKind::RateRegion, f),
        Command::UlRateVsAntennas(f) => (ExperimentKind::UlRateVsAntennas, f),
        Command::ValidateBounds(f) => (ExperimentKind::ValidateBounds, f),
        Command::OptimizeOnce(f) => (ExperimentKind::OptimizeOnce, f),
        Command::CheckConfig { config } => {
            let cfg = validate_config(&config)?;
            println!("{} is valid (experiment: {})", config.display(), cfg.experiment.map_or("unset", |k| k.name()));
            return Ok(());
        }
    };
    let cfg = resolve(kind, &flags)?;
    let out = output_dir(flags.out.clone(), &cfg);
    let report = run(&cfg, kind, &out)?;
    println!(
        "{} finished in {:.1} s; wrote {} to {}",
        kind.name(),
        report.timing.total_seconds,
        report.outputs.join(", "),
        out.display()
    );
    Ok(())
}

/// Parses `args` (including the program name), runs, and returns the exit
/// status: 0 success, 1 I/O, 2 configuration, 3 infeasible, 4 numerical.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let args = match Args::try_parse_from(args) {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match dispatch(args) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
