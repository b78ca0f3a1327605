use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod config;
mod output;

#[derive(Parser)]
#[command(name = "gdp", version, about = "Solitary waves and their collisions in the general Degasperis-Procesi family")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Regime, turning point and existence check for each amplitude
    Classify(Common),
    /// Wave profiles as CSV
    Profile(Common),
    /// Single-wave moments and law coefficients
    Moments(Common),
    /// Interaction system for a pair of waves
    Interact(Common),
    /// Full-equation simulation with peak tracking
    Simulate(Common),
    /// Weak-residual order of the two-wave ansatz
    Residual(Common),
    /// Single-wave mass and energy relations
    #[command(name = "verify-lemma1")]
    VerifyLemma1(Common),
}

#[derive(Args)]
pub struct Common {
    #[arg(long)]
    config: PathBuf,
    /// Output directory; `classify` prints to stdout when it is omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Accepted for interface stability; every algorithm is deterministic.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
    threads: u32,
}

#[derive(Debug)]
pub enum CliError {
    Io(String),
    Config(String),
    Solver(gdp_core::Error),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Io(m) => write!(f, "io: {m}"),
            CliError::Config(m) => write!(f, "validation: config: {m}"),
            CliError::Solver(e) => write!(f, "{}: {e}", e.stage()),
        }
    }
}

impl From<gdp_core::Error> for CliError {
    fn from(e: gdp_core::Error) -> Self {
        CliError::Solver(e)
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Io(_) => 1,
            CliError::Config(_) => 2,
            CliError::Solver(e) => match e.stage() {
                "validation" => 2,
                "root-finding" => 3,
                "numerics" => 4,
                _ => 5,
            },
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Classify(c) => commands::classify(&c),
        Command::Profile(c) => commands::profile(&c),
        Command::Moments(c) => commands::moments(&c),
        Command::Interact(c) => commands::interact(&c),
        Command::Simulate(c) => commands::simulate(&c),
        Command::Residual(c) => commands::residual(&c),
        Command::VerifyLemma1(c) => commands::single_wave_relations(&c),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("gdp: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
