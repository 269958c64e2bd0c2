//! `sthawkes`: command-line pipeline for spatiotemporal Hawkes analysis.
//!
//! Every subcommand writes its artifacts and a `manifest.txt` of the
//! effective settings into `--out`. Logs go to stderr. Exit codes: 0 success,
//! 1 usage error, 2 data error, 3 numerical failure.

mod commands;
mod settings;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgAction, Parser, Subcommand};
use sthawkes::ErrorKind;

#[derive(Parser, Debug)]
#[command(
    name = "sthawkes",
    version,
    about = "Spatiotemporal Hawkes process toolkit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Flat `key = value` configuration file; flags take precedence.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// More log output (repeatable).
    #[arg(short, long, action = ArgAction::Count, global = true)]
    verbose: u8,

    /// Only log warnings and errors.
    #[arg(short, long, global = true)]
    quiet: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Load a raw catalog, merge duplicates and remove holidays.
    Ingest(commands::IngestArgs),
    /// Fit the background and sample the Hawkes posterior.
    Fit(commands::FitArgs),
    /// Simulate a labelled synthetic catalog.
    Simulate(commands::SimulateArgs),
    /// Knox space-time interaction test.
    Knox(commands::KnoxArgs),
    /// Space-time K-function ratio with a permutation envelope.
    Kfun(commands::KfunArgs),
    /// Decompose intensities and label triggered events.
    Classify(commands::ClassifyArgs),
    /// One-step-ahead grid prediction.
    Predict(commands::PredictArgs),
}

fn exit_code(kind: ErrorKind) -> u8 {
    match kind {
        ErrorKind::Usage => 1,
        ErrorKind::Data => 2,
        ErrorKind::Numerical => 3,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let level = match (cli.quiet, cli.verbose) {
        (true, _) => log::LevelFilter::Warn,
        (false, 0) => log::LevelFilter::Info,
        (false, 1) => log::LevelFilter::Debug,
        (false, _) => log::LevelFilter::Trace,
    };
    env_logger::Builder::new()
        .filter_level(level)
        .parse_env("STHAWKES_LOG")
        .format_timestamp(None)
        .init();

    let config = cli.config.as_deref();
    let result = match cli.command {
        Command::Ingest(a) => commands::ingest(a, config),
        Command::Fit(a) => commands::fit(a, config),
        Command::Simulate(a) => commands::simulate(a, config),
        Command::Knox(a) => commands::knox(a, config),
        Command::Kfun(a) => commands::kfun(a, config),
        Command::Classify(a) => commands::classify(a, config),
        Command::Predict(a) => commands::predict(a, config),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.kind());
            ExitCode::from(exit_code(e.kind()))
        }
    }
}
