//! `cdwork`: work-statistics sweeps for counterdiabatically driven spin
//! models, written as CSV.
//!
//! Exit codes: 0 success, 2 invalid configuration, 3 numerical failure.

mod commands;
mod config;
mod output;

use std::fmt;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{Command, Flags};

#[derive(Parser)]
#[command(name = "cdwork", version, about = "Work statistics of counterdiabatic driving")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Two-point-measurement work distribution along one LZ ramp
    LzDist(Flags),
    /// Work entropy over time for a grid of ramp durations
    EntropyMap(Flags),
    /// Impulse-regime width against ramp duration, with power-law fit
    KzScaling(Flags),
    /// Full versus ground-state-only control on the Ising or LMG model
    Compare(Flags),
}

#[derive(Debug)]
pub enum Failure {
    Config(String),
    Numerical(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Config(_) => 2,
            Failure::Numerical(_) => 3,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Config(m) => write!(f, "invalid configuration: {m}"),
            Failure::Numerical(m) => write!(f, "run failed: {m}"),
        }
    }
}

fn run(command: Command, flags: Flags) -> Result<(), Failure> {
    let flag_workers = flags.workers;
    let settings = config::gather(flags)?;
    let cfg = config::resolve(command, settings, flag_workers)?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| Failure::Config(format!("workers: {e}")))?;
    let outcome = pool.install(|| commands::run(&cfg))?;

    for w in &outcome.warnings {
        eprintln!("warning: {w}");
    }
    output::emit(&outcome.table, cfg.out.as_deref())?;
    if let Some(line) = outcome.summary {
        println!("{line}");
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, flags) = match cli.command {
        Cmd::LzDist(f) => (Command::LzDist, f),
        Cmd::EntropyMap(f) => (Command::EntropyMap, f),
        Cmd::KzScaling(f) => (Command::KzScaling, f),
        Cmd::Compare(f) => (Command::Compare, f),
    };
    match run(command, flags) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("cdwork {}: {e}", command.name());
            ExitCode::from(e.code())
        }
    }
}
