//! `tsh`: experiments and analysis checks for Thompson Sampling with an
//! exponent `h` on Bernoulli bandits.

mod experiment;
mod output;
mod verify;

use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use tsh_core::theory::threshold_report;

use experiment::{cmd_run, cmd_sweep, RunArgs, SweepArgs};
use verify::{cmd_verify, VerifyArgs};

#[derive(Debug, Parser)]
#[command(name = "tsh", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate the policy and write the mean regret curve
    Run(RunArgs),
    /// Run one experiment per h on a grid
    Sweep(SweepArgs),
    /// Print the analysis quantities and predicted regime for two arms
    Thresholds(ThresholdArgs),
    /// Check the numeric identities and inequalities behind the analysis
    Verify(VerifyArgs),
}

#[derive(Debug, clap::Args)]
struct ThresholdArgs {
    #[arg(long, allow_negative_numbers = true)]
    mu1: f64,
    #[arg(long, allow_negative_numbers = true)]
    mu2: f64,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    h: f64,
    /// Horizon used for the phase length N
    #[arg(long, default_value_t = 10_000)]
    horizon: u64,
    /// Accepted for symmetry with the other commands; output is always JSON
    #[arg(long)]
    json: bool,
}

fn configure_threads() -> Result<()> {
    if let Ok(raw) = std::env::var("TSH_THREADS") {
        let n: usize = raw
            .trim()
            .parse()
            .with_context(|| format!("TSH_THREADS must be a positive integer, got '{raw}'"))?;
        anyhow::ensure!(n > 0, "TSH_THREADS must be a positive integer, got '{raw}'");
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()?;
    }
    Ok(())
}

fn dispatch(cli: Cli) -> Result<bool> {
    configure_threads()?;
    match cli.command {
        Command::Run(args) => cmd_run(&args).map(|_| true),
        Command::Sweep(args) => cmd_sweep(&args).map(|_| true),
        Command::Thresholds(args) => {
            let report = threshold_report(args.mu1, args.mu2, args.h, args.horizon)?;
            print!("{}", output::to_json(&report)?);
            Ok(true)
        }
        Command::Verify(args) => cmd_verify(&args),
    }
}

fn main() -> ExitCode {
    // clap exits with status 2 on usage errors
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
