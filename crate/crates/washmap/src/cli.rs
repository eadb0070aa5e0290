//! Argument parsing and stage dispatch.

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::config::{Overrides, PipelineConfig};
use crate::error::{CliError, ExitCode, Result};
use crate::stages;
use crate::synth::{self, SynthParams};

#[derive(Parser)]
#[command(
    name = "washmap",
    version,
    about = "Gridded water, sewage and toilet access mapping",
    disable_help_subcommand = true
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,

    /// Pipeline configuration (TOML).
    #[arg(short, long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Override the seed from the config.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Override the output directory from the config (for synth: the
    /// fixture directory, required).
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Worker threads for model fitting and attribution.
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Composite, resample and normalize feature layers.
    Features,
    /// Aggregate census blocks onto the grid and build the training table.
    Aggregate,
    /// Fit one random forest per indicator.
    Train,
    /// Cross-validate the trained models.
    Evaluate,
    /// Predict wall-to-wall maps and residuals.
    Predict,
    /// Attribute predictions to features.
    Explain,
    /// Run every stage in order and record a run manifest.
    RunAll,
    /// Generate a synthetic dataset with a known ground truth.
    Synth {
        /// Standard deviation of the label noise.
        #[arg(long, default_value_t = 0.05)]
        noise: f64,
        /// Number of census blocks.
        #[arg(long, default_value_t = 2000)]
        blocks: usize,
    },
}

impl Cmd {
    fn name(&self) -> &'static str {
        match self {
            Cmd::Features => "features",
            Cmd::Aggregate => "aggregate",
            Cmd::Train => "train",
            Cmd::Evaluate => "evaluate",
            Cmd::Predict => "predict",
            Cmd::Explain => "explain",
            Cmd::RunAll => "run-all",
            Cmd::Synth { .. } => "synth",
        }
    }
}

pub fn run() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let _ = err.print();
            return if err.use_stderr() { ExitCode::Usage } else { ExitCode::Success };
        }
    };
    let stage = cli.command.name();
    match dispatch(cli) {
        Ok(()) => ExitCode::Success,
        Err(err) => {
            eprintln!("washmap {stage}: {err}");
            err.exit_code()
        }
    }
}

fn dispatch(cli: Cli) -> Result<()> {
    if let Some(threads) = cli.threads {
        configure_threads(threads)?;
    }
    if let Cmd::Synth { noise, blocks } = cli.command {
        let out = cli
            .out
            .ok_or_else(|| CliError::usage("synth needs --out <dir> for the fixture"))?;
        let params = SynthParams { seed: cli.seed.unwrap_or(0), noise, n_blocks: blocks };
        return synth::generate(&out, &params);
    }

    let config_path = cli
        .config
        .ok_or_else(|| CliError::usage("--config <file> is required"))?;
    let overrides = Overrides { seed: cli.seed, out: cli.out };
    let cfg = PipelineConfig::load(&config_path, &overrides)?;
    match cli.command {
        Cmd::Features => stages::features(&cfg),
        Cmd::Aggregate => stages::aggregate(&cfg),
        Cmd::Train => stages::train(&cfg),
        Cmd::Evaluate => stages::evaluate(&cfg),
        Cmd::Predict => stages::predict(&cfg),
        Cmd::Explain => stages::explain(&cfg),
        Cmd::RunAll => stages::run_all(&cfg),
        Cmd::Synth { .. } => unreachable!("handled above"),
    }
}

#[cfg(feature = "parallel")]
fn configure_threads(threads: usize) -> Result<()> {
    if threads == 0 {
        return Err(CliError::usage("--threads must be at least 1"));
    }
    // A second call in the same process is fine; the pool keeps its
    // original size.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    Ok(())
}

#[cfg(not(feature = "parallel"))]
fn configure_threads(threads: usize) -> Result<()> {
    if threads == 0 {
        return Err(CliError::usage("--threads must be at least 1"));
    }
    if threads > 1 {
        eprintln!("washmap: built without the parallel feature, running single-threaded");
    }
    Ok(())
}
