//! `haarclt` command-line entry point.
//!
//! Worker count follows `RAYON_NUM_THREADS`; it changes speed, never results.

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};

use haarclt_cli::{parse_config, run, write_records, Experiment, ExperimentConfig, OutputFormat};

#[derive(Parser, Debug)]
#[command(
    name = "haarclt",
    version,
    about = "Monte Carlo experiments on Haar-unitary linear statistics"
)]
struct Cli {
    /// Experiment config file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed (overrides the config).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Replica count (overrides the config).
    #[arg(long, global = true)]
    replicas: Option<usize>,
    /// Output file; stdout when absent (overrides the config).
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Output format (overrides the config).
    #[arg(long, global = true, value_parser = ["csv", "json"])]
    format: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Fluctuation distribution against its Gaussian limit.
    Clt,
    /// Convergence-rate fit across matrix sizes.
    Rate,
    /// Trace-moment orthogonality table.
    Ortho,
    /// Fourier coefficients and their decay.
    Coeffs,
    /// Optimal truncation level per size.
    Truncation,
    /// Sampler unitarity and moment diagnostics.
    SamplerCheck,
}

impl Command {
    fn experiment(self) -> Experiment {
        match self {
            Command::Clt => Experiment::Clt,
            Command::Rate => Experiment::Rate,
            Command::Ortho => Experiment::Ortho,
            Command::Coeffs => Experiment::Coeffs,
            Command::Truncation => Experiment::Truncation,
            Command::SamplerCheck => Experiment::SamplerCheck,
        }
    }
}

fn load_config(cli: &Cli) -> anyhow::Result<ExperimentConfig> {
    let experiment = cli.command.experiment();
    let mut config = match &cli.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .with_context(|| format!("cannot read config {}", path.display()))?;
            let config =
                parse_config(&text).map_err(|e| anyhow::anyhow!("{}: {e}", path.display()))?;
            if config.experiment != experiment {
                bail!(
                    "{} configures experiment {}, but the subcommand is {experiment}",
                    path.display(),
                    config.experiment
                );
            }
            config
        }
        None => ExperimentConfig::new(experiment),
    };
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(replicas) = cli.replicas {
        config.replicas = replicas;
    }
    if let Some(path) = &cli.output {
        config.output_path = Some(path.display().to_string());
    }
    if let Some(format) = &cli.format {
        config.format = format.parse::<OutputFormat>().map_err(anyhow::Error::msg)?;
    }
    config.validate()?;
    Ok(config)
}

fn execute(cli: &Cli) -> anyhow::Result<()> {
    let config = load_config(cli)?;
    let records = run(&config)?;
    match &config.output_path {
        Some(path) => {
            let file =
                File::create(path).with_context(|| format!("cannot create output {path}"))?;
            let mut sink = BufWriter::new(file);
            write_records(&records, config.format, &mut sink)
                .with_context(|| format!("cannot write {path}"))?;
            sink.flush()
                .with_context(|| format!("cannot write {path}"))?;
        }
        None => {
            let stdout = io::stdout().lock();
            write_records(&records, config.format, stdout).context("cannot write to stdout")?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
