//! Command-line front end for `fptf-core`: JSON configs in, CSV/JSON out.

pub mod checks;
pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub use error::{exit, CliError};

#[derive(Debug, Parser)]
#[command(name = "fptf", version, about = "Faber polynomial polarization tensors of layered inclusions")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Grunsky coefficients c_mk as CSV.
    Grunsky(Args),
    /// FPT table with a diagnostics sidecar.
    Fpt(Args),
    /// Potential sampled on a curvilinear grid.
    Field(Args),
    /// Coating conductivities for a neutral inclusion.
    Design(Args),
    /// Self-consistency checks.
    Validate(ValidateArgs),
}

#[derive(Debug, clap::Args)]
pub struct Args {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub truncation: Option<usize>,
}

#[derive(Debug, clap::Args)]
pub struct ValidateArgs {
    #[command(flatten)]
    pub common: Args,
    /// Corrupts one Grunsky coefficient so the symmetry check must fail.
    #[arg(long, hide = true)]
    pub corrupt_grunsky: bool,
}

/// Caps the global thread pool at `FPTF_THREADS` when it is set.
pub fn init_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("FPTF_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| CliError::Config(format!("FPTF_THREADS must be a positive integer, got `{raw}`")))?;
    // a second initialisation in the same process keeps the first pool
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    init_threads()?;
    let (args, corrupt) = match &cli.command {
        Command::Grunsky(a) | Command::Fpt(a) | Command::Field(a) | Command::Design(a) => (a, false),
        Command::Validate(v) => (&v.common, v.corrupt_grunsky),
    };
    let config = config::Config::load(&args.config)?;
    let mut run = commands::Run::new(config, args.out.clone(), args.truncation)?;
    run.corruption.grunsky = corrupt;
    match cli.command {
        Command::Grunsky(_) => commands::grunsky(&run),
        Command::Fpt(_) => commands::fpt(&run),
        Command::Field(_) => commands::field(&run),
        Command::Design(_) => commands::design(&run),
        Command::Validate(_) => commands::validate(&run),
    }
}
