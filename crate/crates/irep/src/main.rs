use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use irep::experiments::{run_all, run_experiment, Experiment, ExperimentOutcome, SUMMARY_FILE};
use irep::{configure_threads, Error, ExperimentConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Command {
    Invariance,
    Selectivity,
    Concentration,
    Pog,
    Hierarchy,
    SampleComplexity,
    All,
}

/// Runs the invariance, selectivity, concentration, POG, hierarchy and
/// sample-complexity experiments and writes JSON/CSV reports.
///
/// Exit status: 0 when every contract passes, 1 on a contract failure or
/// runtime error, 2 on an invalid configuration.
#[derive(Debug, Parser)]
#[command(name = "irep", version)]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// Experiment configuration (JSON, `"schema": 1`).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; defaults to `output.dir` from the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the base seed.
    #[arg(long)]
    seed: Option<u64>,
}

fn print_outcome(o: &ExperimentOutcome) {
    println!(
        "{:<18} {}",
        o.experiment,
        if o.passed { "PASS" } else { "FAIL" }
    );
    for f in &o.failures {
        println!("  {f}");
    }
}

fn run(cli: Cli) -> Result<bool, Error> {
    configure_threads()?;
    let mut cfg = ExperimentConfig::from_path(&cli.config)?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    let out = cli
        .out
        .or_else(|| cfg.output.dir.clone())
        .ok_or_else(|| Error::Config("no output directory: pass --out or set output.dir".into()))?;
    let experiment = match cli.command {
        Command::Invariance => Experiment::Invariance,
        Command::Selectivity => Experiment::Selectivity,
        Command::Concentration => Experiment::Concentration,
        Command::Pog => Experiment::Pog,
        Command::Hierarchy => Experiment::Hierarchy,
        Command::SampleComplexity => Experiment::SampleComplexity,
        Command::All => {
            let summary = run_all(&cfg, &out)?;
            summary.experiments.iter().for_each(print_outcome);
            println!("summary written to {}", out.join(SUMMARY_FILE).display());
            return Ok(summary.passed);
        }
    };
    let outcome = run_experiment(experiment, &cfg, &out)?;
    print_outcome(&outcome);
    Ok(outcome.passed)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("irep: {e}");
            ExitCode::from(if e.is_config() { 2 } else { 1 })
        }
    }
}
