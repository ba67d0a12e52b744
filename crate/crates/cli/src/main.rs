//! Command-line front end: ingest -> fit -> simulate/report, driven by one
//! declarative config file with flag overrides.
//!
//! Exit codes: 0 success, 1 usage, 2 data error, 3 fit failure.

mod commands;
mod config;
mod error;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};

#[derive(Parser)]
#[command(
    name = "vardyn",
    version,
    about = "Competing linguistic-variant dynamics: n-gram ingestion, attention-fading model fits, and the downstream statistics"
)]
struct Cli {
    /// Run configuration (TOML); defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the master seed (permutations and bootstrap).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Overrides the output directory.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Also writes SVG plots where they are optional.
    #[arg(long, global = true)]
    svg: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Aggregate n-gram files into canonical per-verb yearly counts.
    Ingest,
    /// Fit the attention-fading model to aggregated counts.
    Fit,
    /// Export a model trajectory using a named simulator.
    Simulate(commands::simulate::SimulateArgs),
    /// Statistical analyses and plots from the fit report.
    Report,
}

fn load_config(cli: &Cli) -> CliResult<RunConfig> {
    let cfg = match &cli.config {
        Some(path) => RunConfig::load(path).map_err(CliError::usage)?,
        None => RunConfig::default(),
    };
    Ok(cfg.with_overrides(cli.seed, cli.output.clone()))
}

fn run(cli: Cli) -> CliResult<()> {
    let cfg = load_config(&cli)?;
    match &cli.command {
        Command::Ingest => commands::ingest::run(&cfg),
        Command::Fit => commands::fit::run(&cfg),
        Command::Simulate(args) => commands::simulate::run(&cfg, args, cli.svg),
        Command::Report => commands::report::run(&cfg),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // --help/--version arrive here too and are not usage errors.
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {:#}", e.source);
            ExitCode::from(e.kind as u8)
        }
    }
}
