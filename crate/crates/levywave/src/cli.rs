use std::path::PathBuf;

use clap::Parser;

use crate::config::ExperimentConfig;
use crate::error::CliError;
use crate::experiment::{Experiment, RunOutput};

/// Run a stochastic wave equation experiment described by a TOML config.
#[derive(Debug, Parser)]
#[command(name = "levywave", version)]
pub struct Args {
    /// Experiment config file.
    #[arg(long)]
    pub config: PathBuf,
    /// Overrides the config's master seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads; defaults to one per core.
    #[arg(long)]
    pub threads: Option<usize>,
    /// Output directory; overrides `output.dir`.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Loads, validates and runs; nothing is computed if validation fails.
pub fn execute(args: &Args) -> Result<RunOutput, CliError> {
    let mut config = ExperimentConfig::load(&args.config)?;
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(out) = &args.out {
        config.output.dir = Some(out.clone());
    }
    let experiment = Experiment::build(config)?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = args.threads {
        if n == 0 {
            return Err(CliError::Validation("--threads must be positive".into()));
        }
        pool = pool.num_threads(n);
    }
    let pool = pool.build().map_err(|e| CliError::Io(std::io::Error::other(e)))?;
    let out_dir = experiment.default_out_dir();
    pool.install(|| experiment.run(&out_dir))
}
