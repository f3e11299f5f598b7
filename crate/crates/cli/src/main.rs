//! Scenario-driven command line for campaign-control experiments.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 invalid configuration,
//! 3 infeasible budget, 4 solver stopped on iteration caps (artifacts are
//! still written).

mod config;
mod output;
mod runner;

use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "campaign",
    about = "Optimal campaign control of SI information epidemics on networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario (solve or baseline strategy) and write its artifacts
    Solve { config: PathBuf },
    /// Run a parameter sweep with optimal/static/bang-bang comparisons
    Sweep { config: PathBuf },
    /// Validate the mean-field model against Monte Carlo simulation
    Validate { config: PathBuf },
    /// Calibrate and export the static and bang-bang baselines
    Baseline { config: PathBuf },
}

const EXIT_CONFIG: u8 = 2;
const EXIT_INFEASIBLE: u8 = 3;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (path, run): (&PathBuf, fn(&config::Scenario) -> anyhow::Result<i32>) =
        match &cli.command {
            Command::Solve { config } => (config, runner::run_scenario),
            Command::Sweep { config } => (config, runner::run_sweep),
            Command::Validate { config } => (config, runner::run_validation),
            Command::Baseline { config } => (config, runner::run_baseline),
        };

    let scenario = match config::load(path).and_then(config::resolve) {
        Ok(scenario) => scenario,
        Err(err) => {
            eprintln!("configuration error: {err:#}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    campaign_core::exec::configure_workers(scenario.config.output.workers);

    match run(&scenario) {
        Ok(code) => ExitCode::from(code as u8),
        Err(err) => {
            eprintln!("error: {err:#}");
            let code = match err.downcast_ref::<campaign_core::Error>() {
                Some(campaign_core::Error::InfeasibleBudget { .. }) => EXIT_INFEASIBLE,
                _ => 1,
            };
            ExitCode::from(code)
        }
    }
}
