//! Command-line front end of the atom-array optomechanics simulator.
//!
//! One JSON configuration describes a driven two-dimensional array of
//! trapped atoms; the subcommands compute its collective mechanical
//! modes, motional-sideband intensity spectra, squeezing spectra, the
//! equivalent-resonator parameter mapping, and a stochastic oracle run,
//! or sweep one configuration field across a value list. Outputs are
//! deterministic: CSV tables and JSON manifests stamped with the config
//! hash, no timestamps, so a seeded run reproduces every byte.

pub mod commands;
pub mod config;
pub mod fault;
pub mod output;

use clap::{Args, Parser, Subcommand};
use commands::RunKind;
use config::RunConfig;
use fault::{CliResult, Fault};
use std::path::PathBuf;
use std::process::ExitCode;

/// Top-level argument grammar.
#[derive(Debug, Parser)]
#[command(
    name = "optomech",
    about = "Driven atom-array optomechanics: mode tables, sideband and \
             squeezing spectra, cavity mapping, and a stochastic oracle"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

/// Flags shared by every subcommand.
#[derive(Debug, Args)]
pub struct Common {
    /// Path of the JSON run configuration.
    #[arg(long, value_name = "PATH")]
    pub config: PathBuf,
    /// Output directory (overrides output.directory in the config).
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, value_name = "N")]
    pub threads: Option<usize>,
    /// Oracle seed override (requires an oracle section).
    #[arg(long, value_name = "U64")]
    pub seed: Option<u64>,
}

/// Sweep-specific arguments.
#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: Common,
    /// Dotted path of the swept field, e.g. drive.rabi_over_gamma.
    #[arg(long, value_name = "FIELD")]
    pub field: String,
    /// Comma-separated numeric axis values (one token).
    #[arg(
        long,
        value_name = "V1,V2,...",
        value_delimiter = ',',
        num_args = 0..=1,
        allow_hyphen_values = true
    )]
    pub values: Vec<f64>,
    /// Operation to run at each sweep point.
    #[arg(long, value_enum, value_name = "CMD")]
    pub run: RunKind,
}

/// The available operations.
#[derive(Debug, Subcommand)]
pub enum Command {
    /// Collective mechanical mode table.
    Modes(Common),
    /// Motional-sideband intensity spectra at the detection angles.
    Intensity(Common),
    /// Spatio-temporal squeezing spectrum.
    Squeezing(Common),
    /// Equivalent-resonator parameter mapping report.
    CavityMap(Common),
    /// Stochastic oracle run: Welch PSDs and optional trajectories.
    Langevin(Common),
    /// One-axis parameter sweep of another operation.
    Sweep(SweepArgs),
}

impl Command {
    fn common(&self) -> &Common {
        match self {
            Command::Modes(c)
            | Command::Intensity(c)
            | Command::Squeezing(c)
            | Command::CavityMap(c)
            | Command::Langevin(c) => c,
            Command::Sweep(s) => &s.common,
        }
    }
}

/// Executes one parsed invocation.
pub fn run(cli: &Cli) -> CliResult<()> {
    let common = cli.command.common();
    if let Some(n) = common.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Fault::Config(format!("--threads: {e}")))?;
    }
    let mut cfg = RunConfig::load(&common.config)?;
    if let Some(seed) = common.seed {
        cfg.oracle
            .as_mut()
            .ok_or_else(|| {
                Fault::Config("--seed given but the config has no oracle section".into())
            })?
            .seed = seed;
    }
    let out = common
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(cfg.output().directory));
    match &cli.command {
        Command::Modes(_) => commands::dispatch(RunKind::Modes, &cfg, &out),
        Command::Intensity(_) => commands::dispatch(RunKind::Intensity, &cfg, &out),
        Command::Squeezing(_) => commands::dispatch(RunKind::Squeezing, &cfg, &out),
        Command::CavityMap(_) => commands::dispatch(RunKind::CavityMap, &cfg, &out),
        Command::Langevin(_) => commands::dispatch(RunKind::Langevin, &cfg, &out),
        Command::Sweep(args) => {
            commands::run_sweep(&cfg, &out, &args.field, &args.values, args.run)
        }
    }
}

/// Binary entry point: parse, run, translate failures to exit codes.
pub fn main_entry() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(fault) => {
            eprintln!("{fault}");
            ExitCode::from(fault.exit_code())
        }
    }
}
