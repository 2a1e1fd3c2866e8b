use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use nlsgraph_cli::{CliError, ExperimentConfig};

#[derive(Parser)]
#[command(name = "nlsgraph", version, about = "NLS soliton dynamics and ground states on metric graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    /// Experiment config (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `output.dir` of the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Concurrent member runs in scans.
    #[arg(long, default_value_t = 1)]
    workers: usize,
    /// Seed of randomized initial guesses.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate the configured datum and export observables and snapshots.
    Simulate(Common),
    /// Minimize the energy at fixed mass by the normalized gradient flow.
    Groundstate(Common),
    /// One simulation per incoming velocity, with a reflection threshold.
    ScanVelocity(Common),
    /// One simulation per initial center, with centroid displacements.
    ScanPosition(Common),
}

fn out_dir(args: &Common, config: &ExperimentConfig) -> PathBuf {
    args.out.clone().or_else(|| config.output_dir.clone()).unwrap_or_else(|| Path::new("runs").to_path_buf())
}

fn run(command: Command) -> Result<(), CliError> {
    let (args, kind) = match &command {
        Command::Simulate(a) => (a, "simulate"),
        Command::Groundstate(a) => (a, "groundstate"),
        Command::ScanVelocity(a) => (a, "scan-velocity"),
        Command::ScanPosition(a) => (a, "scan-position"),
    };
    if args.workers == 0 {
        return Err(CliError::Invalid("--workers must be at least 1".into()));
    }
    let config = ExperimentConfig::load(&args.config)?;
    let out = out_dir(args, &config);
    log::info!("{kind}: writing to {}", out.display());
    match command {
        Command::Simulate(_) => {
            let s = nlsgraph_cli::simulate(&config, &out)?;
            log::info!(
                "collision at t = {:?}, launch-edge fraction {:.4}, mass drift {:.2e}, energy drift {:.2e}",
                s.collision_time, s.launch_fraction_final, s.mass_drift, s.energy_drift
            );
        }
        Command::Groundstate(_) => {
            let s = nlsgraph_cli::groundstate(&config, &out, args.seed)?;
            log::info!("{:?} after {} iterates, energy {:.10}", s.classification, s.iterations, s.energy);
        }
        Command::ScanVelocity(_) => {
            let s = nlsgraph_cli::scan_velocity(&config, &out, args.workers)?;
            log::info!("threshold {:?} (monotone: {})", s.threshold, s.monotone);
        }
        Command::ScanPosition(_) => {
            nlsgraph_cli::scan_position(&config, &out, args.workers)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            log::error!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
