// Copyright 2026 The oqs Authors
// SPDX-License-Identifier: Apache-2.0

//! `oqs <subcommand> --config <file> [--out <dir>] [--seed <u64>] [--threads <n>] [--full]`

mod config;
mod experiments;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use oqs_core::exec::Execution;

use experiments::{Failure, RunOptions};

const EXIT_IO: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
enum Command {
    Errormap,
    Imbalance,
    OptimCompare,
    Brownian,
    Weights,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Errormap => "errormap",
            Command::Imbalance => "imbalance",
            Command::OptimCompare => "optim_compare",
            Command::Brownian => "brownian",
            Command::Weights => "weights",
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "oqs",
    version,
    about = "Redfield, RWA and truncated Lindblad experiments"
)]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// JSON experiment configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `output` in the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides `seed` in the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; 1 runs sequentially.
    #[arg(long)]
    threads: Option<usize>,
    /// Allow large system sizes.
    #[arg(long)]
    full: bool,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_CONFIG)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err((code, msg)) => {
            eprintln!("oqs: {msg}");
            ExitCode::from(code)
        }
    }
}

fn run(cli: &Cli) -> Result<(), (u8, String)> {
    let bytes = std::fs::read(&cli.config).map_err(|e| {
        (
            EXIT_CONFIG,
            format!("cannot read {}: {e}", cli.config.display()),
        )
    })?;
    let text = std::str::from_utf8(&bytes)
        .map_err(|e| (EXIT_CONFIG, format!("config is not UTF-8: {e}")))?;
    let cfg = config::parse(text).map_err(|e| (EXIT_CONFIG, format!("config error: {e}")))?;
    if cli.threads == Some(0) {
        return Err((EXIT_CONFIG, "--threads must be at least 1".into()));
    }
    let seed = cli.seed.or(cfg.seed).unwrap_or(0);
    let opts = RunOptions {
        full: cli.full,
        seed,
        exec: Execution::with_threads(cli.threads),
    };
    let result = match cli.command {
        Command::Errormap => experiments::errormap(&cfg, opts),
        Command::Imbalance => experiments::imbalance(&cfg, opts),
        Command::OptimCompare => experiments::optim_compare(&cfg, opts),
        Command::Brownian => experiments::brownian(&cfg, opts),
        Command::Weights => experiments::weights(&cfg, opts),
    };
    let table = result.map_err(|f| match f {
        Failure::Config(m) => (EXIT_CONFIG, format!("config error: {m}")),
        Failure::Numerical(m) => (EXIT_NUMERICAL, format!("numerical failure: {m}")),
    })?;
    if table
        .rows
        .iter()
        .flatten()
        .any(|v| v == "NaN" || v == "inf" || v == "-inf")
    {
        return Err((
            EXIT_NUMERICAL,
            "numerical failure: non-finite values in the result".into(),
        ));
    }
    let info = output::RunInfo {
        experiment: cfg.experiment.clone(),
        command: cli.command.name().into(),
        config_sha256: output::config_hash(&bytes),
        seed,
        threads: cli.threads,
        full: cli.full,
    };
    let dir = cli
        .out
        .clone()
        .or_else(|| cfg.output.clone())
        .unwrap_or_else(|| PathBuf::from("."));
    let (csv, meta) = output::write(&dir, &info, &table)
        .map_err(|e| (EXIT_IO, format!("cannot write output: {e}")))?;
    eprintln!("wrote {} and {}", csv.display(), meta.display());
    Ok(())
}
