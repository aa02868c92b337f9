//! `lindloc` — simulate local master equations for networks of thermalized
//! subsystems and audit their thermodynamics.
//!
//! Exit status: 0 success, 1 usage/config/model error, 2 second-law
//! violation under the modified generator.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("{0}")]
    Model(#[from] lindloc::Error),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("usage error: {0}")]
    Usage(String),
    #[error("{context}: {source}")]
    Context { context: String, source: Box<CliError> },
}

impl CliError {
    pub fn context(self, context: String) -> Self {
        CliError::Context { context, source: Box::new(self) }
    }
}

#[derive(Debug, Parser)]
#[command(name = "lindloc", version, about = "Local GKLS master equations with a thermodynamic audit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Integrate the master equation and audit every recorded state.
    Simulate(RunArgs),
    /// Solve for the steady state and report its heat currents.
    Steady(RunArgs),
    /// Repeat `steady` over the values listed in the [sweep] section.
    Sweep(RunArgs),
    /// Run the modified and naive generators side by side.
    Compare(RunArgs),
}

#[derive(Debug, Args)]
struct RunArgs {
    /// TOML run configuration.
    config: PathBuf,
    /// Output directory (overrides `output.directory`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for sweeps.
    #[arg(long)]
    jobs: Option<usize>,
    /// Print the parsed configuration in normalized form and exit.
    #[arg(long)]
    dump_config: bool,
}

fn run(cli: Cli) -> Result<u8, CliError> {
    let (Command::Simulate(args) | Command::Steady(args) | Command::Sweep(args) | Command::Compare(args)) =
        &cli.command;
    if args.jobs == Some(0) {
        return Err(CliError::Usage("--jobs must be at least 1".into()));
    }
    let text = std::fs::read_to_string(&args.config)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", args.config.display())))?;
    let cfg = config::parse(&text).map_err(|e| e.context(args.config.display().to_string()))?;
    if args.dump_config {
        print!("{}", cfg.to_toml()?);
        return Ok(commands::EXIT_OK);
    }
    let out_dir = args
        .out
        .clone()
        .or_else(|| cfg.output_dir().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("lindloc-out"));
    let ctx = commands::Context { cfg, text, out_dir, jobs: args.jobs };
    match cli.command {
        Command::Simulate(_) => commands::simulate(&ctx),
        Command::Steady(_) => commands::steady(&ctx),
        Command::Sweep(_) => commands::sweep(&ctx),
        Command::Compare(_) => commands::compare(&ctx),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("LINDLOC_LOG", "warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // Help and version requests are not errors.
            return ExitCode::from(u8::from(e.use_stderr()));
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("lindloc: {e}");
            ExitCode::from(1)
        }
    }
}
