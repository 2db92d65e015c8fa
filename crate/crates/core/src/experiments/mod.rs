//! Batch orchestration behind the `probconv` binary: configuration, the
//! subcommands, and their result files.
//!
//! Every subcommand runs inside a rayon pool sized by `threads`; results do
//! not depend on the pool size.

pub mod checks;
pub mod config;
pub mod output;
pub mod report;
pub mod runs;

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

pub use config::{RunConfig, ValidatedConfig};

use crate::{Error, Result};

/// The batch subcommands.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    CheckWiener,
    CheckPropagators,
    Khintchine,
    Tails,
    Convergence,
    Density,
    Report,
}

impl Command {
    pub const ALL: [Command; 7] = [
        Command::CheckWiener,
        Command::CheckPropagators,
        Command::Khintchine,
        Command::Tails,
        Command::Convergence,
        Command::Density,
        Command::Report,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Command::CheckWiener => "check-wiener",
            Command::CheckPropagators => "check-propagators",
            Command::Khintchine => "khintchine",
            Command::Tails => "tails",
            Command::Convergence => "convergence",
            Command::Density => "density",
            Command::Report => "report",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Command {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Command::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown subcommand `{s}`")))
    }
}

/// What a subcommand produced.
#[derive(Debug, Clone)]
pub struct Outcome {
    /// Human-readable table.
    pub lines: Vec<String>,
    pub files: Vec<PathBuf>,
    /// Set by `check-*` subcommands when any check failed.
    pub check_failed: bool,
}

/// Process exit status: 0 success, 1 validation or runtime error, 2 failed check.
pub fn exit_code(result: &Result<Outcome>) -> i32 {
    match result {
        Ok(o) if o.check_failed => 2,
        Ok(_) => 0,
        Err(_) => 1,
    }
}

/// Validates `config` (relative paths resolve against `base`) and runs `command`.
pub fn run(command: Command, config: &RunConfig, base: &Path) -> Result<Outcome> {
    let cfg = config.validate(base)?;
    let mut cfg_abs = cfg.clone();
    if cfg_abs.raw.output_dir.is_relative() {
        cfg_abs.raw.output_dir = base.join(&cfg.raw.output_dir);
    }
    let work = || dispatch(command, &cfg_abs);
    match config.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Config(format!("threads: {e}")))?
            .install(work),
        None => work(),
    }
}

fn check_table(cfg: &ValidatedConfig, name: &str, rows: Vec<checks::CheckRow>) -> Result<Outcome> {
    let file = output::write_csv(&cfg.raw.output_dir, name, &cfg.hash, &rows)?;
    let mut lines = vec![format!("{:<34} {:>12} {:>12}  result  note", "check", "value", "threshold")];
    lines.extend(rows.iter().map(|r| {
        format!(
            "{:<34} {:>12.4e} {:>12.4e}  {}    {}",
            r.check,
            r.value,
            r.threshold,
            if r.passed { "pass" } else { "FAIL" },
            r.note
        )
    }));
    let failed = rows.iter().filter(|r| !r.passed).count();
    lines.push(format!("{} of {} checks passed", rows.len() - failed, rows.len()));
    Ok(Outcome { lines, files: vec![file], check_failed: failed > 0 })
}

fn dispatch(command: Command, cfg: &ValidatedConfig) -> Result<Outcome> {
    match command {
        Command::CheckWiener => {
            let rows = checks::wiener_checks(cfg.seed, cfg.raw.trials)?;
            check_table(cfg, "check_wiener.csv", rows)
        }
        Command::CheckPropagators => {
            let rows = checks::propagator_checks(cfg.seed, cfg.raw.trials)?;
            check_table(cfg, "check_propagators.csv", rows)
        }
        Command::Khintchine => runs::khintchine(cfg),
        Command::Tails => runs::tails(cfg),
        Command::Convergence => runs::convergence(cfg),
        Command::Density => runs::density(cfg),
        Command::Report => report::report(&cfg.raw.output_dir),
    }
}
