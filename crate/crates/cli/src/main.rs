use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use vessel_fsi::run::{prepare, run_config, RunError};
use vessel_fsi::scenario::ScenarioConfig;

#[derive(Debug, Clone, Copy, ValueEnum)]
enum LogLevel {
    Info,
    Debug,
}

/// Simulates pressure-driven flow in a compliant 2D vessel.
#[derive(Debug, Parser)]
#[command(name = "vessel-sim", version)]
struct Args {
    /// Scenario configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory, overriding the one in the configuration.
    #[arg(long)]
    output_dir: Option<PathBuf>,
    /// Validate and print the resolved configuration without running.
    #[arg(long)]
    dry_run: bool,
    #[arg(long, value_enum, default_value = "info")]
    log_level: LogLevel,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let level = match args.log_level {
        LogLevel::Info => log::LevelFilter::Info,
        LogLevel::Debug => log::LevelFilter::Debug,
    };
    env_logger::Builder::new().filter_level(level).init();

    match execute(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn execute(args: &Args) -> Result<(), RunError> {
    let mut cfg = ScenarioConfig::from_file(&args.config)?;
    if let Some(dir) = &args.output_dir {
        cfg.output.directory = dir.clone();
    }
    if args.dry_run {
        prepare(&cfg)?;
        print!("{cfg}");
        return Ok(());
    }
    let summary = run_config(&cfg)?;
    log::info!(
        "{} steps written to {} ({} subiterations, at most {} per step)",
        summary.steps,
        summary.output_dir.display(),
        summary.total_subiterations,
        summary.max_subiterations
    );
    Ok(())
}
