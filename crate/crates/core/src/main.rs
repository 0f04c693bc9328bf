use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use varinorm::experiments::{self, output, ExperimentConfig};

#[derive(Parser)]
#[command(
    name = "varinorm",
    version,
    about = "Parameter-free online learning experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and write its regret trace.
    Run {
        /// Experiment configuration file.
        config: PathBuf,
    },
    /// Recompute the bound report of a saved trace.
    Bounds {
        /// CSV or JSON trace written by `run`.
        trace: PathBuf,
    },
    /// Compare predictions on a supervised stream and its rescaled twin.
    Scaletest {
        /// Experiment configuration file with a `rescale` key.
        config: PathBuf,
        /// Exit with failure when the deviation exceeds this value.
        #[arg(long)]
        tolerance: Option<f64>,
    },
}

fn run(config: &Path) -> Result<()> {
    let config = ExperimentConfig::load(config)?;
    let trace = experiments::run_experiment(&config)?;
    let text = output::render(&trace, config.output_format)?;
    match &config.output_path {
        Some(path) => std::fs::write(path, text)
            .with_context(|| format!("cannot write {}", path.display()))?,
        None => print!("{text}"),
    }
    let s = trace.summary();
    eprintln!(
        "{}: rounds={} regret={:.6} regret/bound_l2={:.4} regret/bound_fullmatrix={:.4} regret/bound_adagrad={:.4}",
        trace.learner, s.rounds, s.regret, s.ratio_l2, s.ratio_fullmatrix, s.ratio_adagrad
    );
    Ok(())
}

fn bounds(path: &Path) -> Result<bool> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let trace = output::read_trace(&text)?;
    let report = output::recompute_report(&trace)?;
    println!("report {}", output::format_report(&report));
    let matches = report == trace.report;
    println!("trailer {}", if matches { "match" } else { "mismatch" });
    Ok(matches)
}

fn scaletest(path: &Path, tolerance: Option<f64>) -> Result<bool> {
    let config = ExperimentConfig::load(path)?;
    let report = experiments::scale_test(&config)?;
    println!(
        "rounds={} max_relative_deviation={:e} sequence_deviation={:e}",
        report.rounds, report.max_relative_deviation, report.sequence_deviation
    );
    match tolerance {
        Some(t) if t.is_nan() || t < 0.0 => bail!("tolerance must be non-negative"),
        Some(t) => Ok(report.max_relative_deviation <= t),
        None => Ok(true),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Run { config } => run(config).map(|()| true),
        Command::Bounds { trace } => bounds(trace),
        Command::Scaletest { config, tolerance } => scaletest(config, *tolerance),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}
