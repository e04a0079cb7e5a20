//! Command-line front end: simulation, published-scenario reproduction,
//! angle-file analysis, channel-balance calibration, and solver
//! cross-validation.
//!
//! Exit codes: 0 on success, 1 for usage or configuration problems, 2 for
//! numerical failures, 3 when a scenario's statistical acceptance check
//! fails (its output files are still written).

mod commands;
mod config;
mod error;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::ExperimentConfig;
use error::Result;

#[derive(Parser)]
#[command(name = "ramanpol", version, about = "Stokes polarization randomness simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// INI configuration file; defaults apply when omitted
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed override
    #[arg(long)]
    seed: Option<u64>,
    /// Pulse count override
    #[arg(long)]
    pulses: Option<usize>,
    /// Worker threads (0 = machine parallelism)
    #[arg(long)]
    threads: Option<usize>,
    /// Output directory
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Publication-scale pulse budget (overridden by --pulses)
    #[arg(long)]
    full: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate an ensemble and write per-pulse energies and angles
    Simulate(RunArgs),
    /// Re-run a published scenario: fig3, fig4, or table1
    Reproduce {
        scenario: String,
        #[command(flatten)]
        args: RunArgs,
    },
    /// Histogram, uniformity, ordinal battery, and min-entropy of an angle file
    Analyze {
        input: PathBuf,
        #[command(flatten)]
        args: RunArgs,
    },
    /// Fit the channel balance on the pinned-orientation scenario
    Calibrate(RunArgs),
    /// Compare the two solvers and the unpumped decay rate
    Crossvalidate(RunArgs),
}

fn load_config(args: &RunArgs) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::load(args.config.as_deref())?;
    cfg.apply_overrides(args.seed, args.pulses, args.threads, args.full)?;
    if cfg.threads > 0 {
        // Ignore the error: the pool can only be set once per process, and a
        // second initialization attempt means it is already configured.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(cfg.threads).build_global();
    }
    Ok(cfg)
}

fn dispatch(command: &Command) -> Result<()> {
    match command {
        Command::Simulate(args) => {
            let cfg = load_config(args)?;
            commands::simulate::run(&cfg, &args.out)
        }
        Command::Reproduce { scenario, args } => {
            let cfg = load_config(args)?;
            commands::reproduce::run(scenario, &cfg, &args.out)
        }
        Command::Analyze { input, args } => {
            // Analysis is input-driven; the config only contributes thread
            // and output-path plumbing, so overrides still apply.
            let _ = load_config(args)?;
            commands::analyze::run(input, &args.out)
        }
        Command::Calibrate(args) => {
            let cfg = load_config(args)?;
            commands::calibrate::run(&cfg, &args.out)
        }
        Command::Crossvalidate(args) => {
            let cfg = load_config(args)?;
            commands::crossvalidate::run(&cfg, &args.out)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(&cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
