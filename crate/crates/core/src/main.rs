//! `probconv`: batch front end for the randomized-data flow experiments.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use probconv::experiments::{self, Command, RunConfig};
use probconv::experiments::config::SeedValue;

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Sub {
    CheckWiener,
    CheckPropagators,
    Khintchine,
    Tails,
    Convergence,
    Density,
    Report,
}

impl From<Sub> for Command {
    fn from(s: Sub) -> Self {
        match s {
            Sub::CheckWiener => Command::CheckWiener,
            Sub::CheckPropagators => Command::CheckPropagators,
            Sub::Khintchine => Command::Khintchine,
            Sub::Tails => Command::Tails,
            Sub::Convergence => Command::Convergence,
            Sub::Density => Command::Density,
            Sub::Report => Command::Report,
        }
    }
}

/// Simulate randomized initial data under free dispersive flows and check
/// tail-probability bounds. Every flag can also be set through the
/// environment variable shown next to it.
#[derive(Debug, Parser)]
#[command(version, about)]
struct Cli {
    /// Subcommand to run.
    #[arg(value_enum)]
    command: Sub,
    /// TOML run configuration; built-in defaults are used when absent.
    #[arg(long, env = "PROBCONV_CONFIG")]
    config: Option<PathBuf>,
    /// Ensemble seed, decimal or 0x-hex; overrides the configuration.
    #[arg(long, env = "PROBCONV_SEED")]
    seed: Option<String>,
    /// Worker threads; overrides the configuration.
    #[arg(long, env = "PROBCONV_THREADS")]
    threads: Option<usize>,
    /// Output directory; overrides the configuration.
    #[arg(long, env = "PROBCONV_OUT")]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (mut config, base) = match &cli.config {
        Some(path) => match RunConfig::load(path) {
            Ok(c) => (c, path.parent().map(PathBuf::from).unwrap_or_default()),
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(1);
            }
        },
        None => (RunConfig::default(), PathBuf::from(".")),
    };
    if let Some(s) = cli.seed {
        config.seed = SeedValue::Text(s);
    }
    if cli.threads.is_some() {
        config.threads = cli.threads;
    }
    if let Some(out) = cli.out {
        // Flags resolve against the working directory, not the config file.
        config.output_dir = std::env::current_dir().map(|d| d.join(&out)).unwrap_or(out);
    }
    let result = experiments::run(cli.command.into(), &config, &base);
    match &result {
        Ok(outcome) => {
            for line in &outcome.lines {
                println!("{line}");
            }
            for file in &outcome.files {
                println!("wrote {}", file.display());
            }
        }
        Err(e) => eprintln!("error: {e}"),
    }
    ExitCode::from(experiments::exit_code(&result) as u8)
}
