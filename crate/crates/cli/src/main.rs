//! `maskshift`: staged face-mask opinion pipeline.
//!
//! Each subcommand reads the artifacts of the stages before it from the
//! output directory and writes its own, recording itself in
//! `manifest.json`.

mod commands;
mod config;
mod error;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::PipelineConfig;
use error::CliError;

#[derive(Parser)]
#[command(name = "maskshift", version, about = "Face-mask opinion pipeline: filter, score, attribute, model topics, detect sentiment shifts")]
struct Cli {
    /// Pipeline config (TOML).
    #[arg(long, global = true, default_value = "maskshift.toml")]
    config: PathBuf,
    /// Output directory; overrides `out` in the config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Master seed; overrides `seed` in the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// More log output (repeat for more).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Keep English mask-related tweets from non-organizations.
    Filter,
    /// Score tweet sentiment.
    Score,
    /// Attribute demographic labels to authors.
    Demo,
    /// Fit topic models and pick the most coherent.
    Topics,
    /// Build daily sentiment series per demographic filter.
    Series,
    /// Detect change points in every series and match events.
    Detect,
    /// Emit figure data and the summary.
    Report,
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let cfg = PipelineConfig::load(&cli.config, cli.out.clone(), cli.seed)?;
    std::fs::create_dir_all(&cfg.out).map_err(|e| CliError::write(&cfg.out, e))?;
    match cli.command {
        Command::Filter => commands::filter::run(&cfg),
        Command::Score => commands::score::run(&cfg),
        Command::Demo => commands::demo::run(&cfg),
        Command::Topics => commands::topics::run(&cfg),
        Command::Series => commands::series::run(&cfg),
        Command::Detect => commands::detect::run(&cfg),
        Command::Report => commands::report::run(&cfg),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("maskshift: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
