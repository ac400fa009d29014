//! `tropifs`: run max-plus IFS computations from a JSON configuration.

mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::config::RunConfig;
use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "tropifs", version, about = "Invariant max-plus measures of iterated function systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory, created if missing.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for a random system source, overriding the one in the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for parallel kernels.
    #[arg(long, global = true, env = "TROPIFS_THREADS")]
    threads: Option<usize>,
}

#[derive(Clone, Copy, Debug, Subcommand)]
enum Command {
    /// Check a system and write validation.json.
    Validate,
    /// Write the potential matrix (S.csv, S.json) and the Aubry set (aubry.json).
    Mane,
    /// Write invariant densities (density.json) and their checks (verify.json).
    Invariant,
    /// Iterate the conjugate fuzzy system (attractor.csv, trace.csv, fuzzy.json).
    Fuzzy,
    /// Non-uniqueness on binary sequences (demo31.json).
    Demo31,
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Config("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("cannot start thread pool: {e}")))?;
    }
    let path = cli.config.ok_or_else(|| CliError::Config("--config is required".into()))?;
    let out = cli.out.ok_or_else(|| CliError::Config("--out is required".into()))?;
    let mut config = RunConfig::load(&path)?;
    if let Some(seed) = cli.seed {
        config.override_seed(seed);
    }
    std::fs::create_dir_all(&out)
        .map_err(|e| CliError::Config(format!("cannot create {}: {e}", out.display())))?;
    match cli.command {
        Command::Validate => commands::validate_cmd(&config, &out),
        Command::Mane => commands::mane_cmd(&config, &out),
        Command::Invariant => commands::invariant_cmd(&config, &out),
        Command::Fuzzy => commands::fuzzy_cmd(&config, &out),
        Command::Demo31 => commands::demo31_cmd(&config, &out),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 3 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("tropifs: {e}");
            e.exit_code()
        }
    }
}
