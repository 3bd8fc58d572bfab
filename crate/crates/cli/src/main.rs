//! `purcellsim <command> --config <file> [--out <dir>] [--seed <u64>]`
//!
//! Exit codes: 0 success, 1 invalid input, 2 numerical failure.

// `!(x > 0.0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod error;
mod output;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::{Ctx, FitModel, Protocol};
use error::CliError;
use output::Artifact;

#[derive(Parser)]
#[command(name = "purcellsim", version, about = "Purcell-limited spin relaxation simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `out_dir` in the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Noise seed; overrides `seed` in the config.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Transition table at [transitions].B0_T.
    Transitions(Common),
    /// T1 against detuning.
    Purcell(Common),
    /// Simulate one measurement protocol.
    Simulate {
        protocol: Protocol,
        #[command(flatten)]
        common: Common,
    },
    /// Fit a CSV written by `simulate` (or with the same columns).
    Fit {
        model: FitModel,
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// The full set of reference outputs into the output directory.
    Reproduce(Common),
}

fn run(cli: Cli) -> Result<(), CliError> {
    let common = match &cli.command {
        Command::Transitions(c) | Command::Purcell(c) | Command::Reproduce(c) => c,
        Command::Simulate { common, .. } | Command::Fit { common, .. } => common,
    };
    let loaded = config::load(&common.config)?;
    let cfg = &loaded.config;
    let out_dir = common.out.clone().or_else(|| cfg.out_dir.clone());
    if matches!(cli.command, Command::Reproduce(_)) && out_dir.is_none() {
        return Err(CliError::config("reproduce needs --out or out_dir"));
    }
    let ctx = Ctx {
        cfg,
        sha: &loaded.sha256,
        seed: cfg.seed(common.seed),
    };
    let artifacts = match &cli.command {
        Command::Transitions(_) => commands::transitions(&ctx)?,
        Command::Purcell(_) => commands::purcell(&ctx)?,
        Command::Simulate { protocol, .. } => commands::simulate(&ctx, *protocol)?,
        Command::Fit { model, input, .. } => commands::fit(&ctx, *model, input)?,
        Command::Reproduce(_) => commands::reproduce(&ctx)?,
    };
    match out_dir {
        Some(dir) => output::write_all(&dir, &artifacts),
        None => print_all(&artifacts),
    }
}

fn print_all(artifacts: &[Artifact]) -> Result<(), CliError> {
    let mut stdout = std::io::stdout().lock();
    for a in artifacts {
        stdout.write_all(a.contents.as_bytes()).map_err(|source| CliError::Io {
            path: PathBuf::from("<stdout>"),
            source,
        })?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let usage = e.use_stderr();
            let _ = e.print();
            return if usage { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
