//! Command-line runner for the spectator-control experiments.

mod config;
mod experiments;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use config::{Diagnostic, Overrides, Severity};

#[derive(Parser)]
#[command(name = "rtn-spectator", version, about = "Run spectator-qubit control experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Replaces the seed from the config file.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Replaces the output directory from the config file.
    #[arg(long, global = true)]
    output_dir: Option<PathBuf>,
    /// Worker threads; defaults to one per core.
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a config file.
    Run { config: PathBuf },
    /// Check a config file without running it.
    Validate { config: PathBuf },
    /// List the registered experiments.
    ListExperiments,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let overrides = Overrides { seed: cli.seed, output_dir: cli.output_dir.clone() };
    let result = match &cli.command {
        Command::Run { config } => run(config, &overrides, cli.threads),
        Command::Validate { config } => validate(config, &overrides),
        Command::ListExperiments => {
            for e in experiments::REGISTRY {
                println!("{:<16} {}", e.name, e.description);
            }
            Ok(ExitCode::SUCCESS)
        }
    };
    result.unwrap_or_else(|e| {
        eprintln!("error: {e:#}");
        ExitCode::FAILURE
    })
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn report(path: &Path, diagnostics: &[Diagnostic]) {
    for d in diagnostics {
        eprintln!("{}: {d}", path.display());
    }
}

fn validate(path: &Path, overrides: &Overrides) -> Result<ExitCode> {
    let text = read(path)?;
    let (_, diagnostics) = config::load(&text, overrides);
    report(path, &diagnostics);
    if diagnostics.iter().any(|d| d.severity == Severity::Error) {
        return Ok(ExitCode::from(2));
    }
    if diagnostics.is_empty() {
        println!("{}: ok", path.display());
    }
    Ok(ExitCode::SUCCESS)
}

fn run(path: &Path, overrides: &Overrides, threads: Option<usize>) -> Result<ExitCode> {
    let text = read(path)?;
    let (config, diagnostics) = config::load(&text, overrides);
    report(path, &diagnostics);
    let Some(config) = config else {
        return Ok(ExitCode::from(2));
    };
    if let Some(n) = threads {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().context("configuring worker threads")?;
    }
    let experiment = experiments::find(&config.experiment).expect("validated");
    let table = (experiment.run)(&config).with_context(|| format!("experiment {}", experiment.name))?;
    let (csv, manifest) = output::write(&config, &table)?;
    println!("{}", csv.display());
    println!("{}", manifest.display());
    Ok(ExitCode::SUCCESS)
}
