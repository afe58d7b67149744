use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use hhw_harness::commands::{self, Options};
use hhw_harness::{HarnessError, ScenarioConfig, SweepConfig};

#[derive(Parser)]
#[command(
    name = "hhw",
    version,
    about = "Simulate and verify synchronization of HHW neural networks"
)]
struct Cli {
    /// Suppress progress output on stdout.
    #[arg(long, global = true)]
    quiet: bool,
    /// Override the seed of random initial states (and of sweeps).
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, hide = true, default_value_t = 1.0)]
    debug_mu_scale: f64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one scenario and write its artifacts.
    Simulate {
        config: PathBuf,
        /// Output directory; overrides `output_dir` from the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the closed-form constants for a scenario as JSON.
    Bounds { config: PathBuf },
    /// Simulate and check the dissipativity and synchronization results.
    Verify {
        config: PathBuf,
        /// Number of consecutive seeds to run from the configured one.
        #[arg(long, default_value_t = 1)]
        seeds: u32,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a parameter sweep.
    Sweep {
        config: PathBuf,
        /// Concurrent runs; defaults to the number of logical CPUs.
        #[arg(long)]
        jobs: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> Result<u8, HarnessError> {
    let opts = Options {
        quiet: cli.quiet,
        seed: cli.seed,
        mu_scale: cli.debug_mu_scale,
    };
    match cli.command {
        Command::Simulate { config, out } => commands::simulate(&ScenarioConfig::load(&config)?, out.as_deref(), &opts),
        Command::Bounds { config } => commands::bounds(&ScenarioConfig::load(&config)?, &opts).map(|r| r.0),
        Command::Verify { config, seeds, out } => {
            commands::verify(&ScenarioConfig::load(&config)?, seeds, out.as_deref(), &opts).map(|r| r.0)
        }
        Command::Sweep { config, jobs, out } => {
            commands::sweep(&SweepConfig::load(&config)?, jobs, out.as_deref(), &opts).map(|r| r.0)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
