use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rfi_qsdc_cli::config::{load_config, MuMode};
use rfi_qsdc_cli::{run, Command, Outputs, Verbosity, EXIT_CONFIG};

/// Secrecy message capacity of decoy-state reference-frame-independent QSDC.
#[derive(Parser)]
#[command(version, about)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Capacity over the attenuation grid for every beta.
    Scan {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        mode: Option<Mode>,
    },
    /// Capacity at `attenuation_db` for every beta.
    Point {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        mode: Option<Mode>,
    },
    /// Largest attenuation with positive capacity, for every beta.
    Cutoff {
        #[command(flatten)]
        common: Common,
    },
    /// Check the closed forms and the LP solver against brute-force oracles.
    Selftest {
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Fixed,
    Optimized,
}

#[derive(Args)]
struct Common {
    /// Flat `key = value` configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override one key, applied after the file (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// CSV output path.
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON summary path.
    #[arg(long)]
    summary: Option<PathBuf>,
    #[arg(long, short, conflicts_with = "verbose")]
    quiet: bool,
    #[arg(long, short)]
    verbose: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, common, mode) = match cli.command {
        Cmd::Scan { common, mode } => (Command::Scan, common, mode),
        Cmd::Point { common, mode } => (Command::Point, common, mode),
        Cmd::Cutoff { common } => (Command::Cutoff, common, None),
        Cmd::Selftest { common } => (Command::Selftest, common, None),
    };
    let mut cfg = match load_config(common.config.as_deref(), &common.overrides) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("config error: {e}");
            return ExitCode::from(EXIT_CONFIG as u8);
        }
    };
    if let Some(m) = mode {
        cfg.mu_mode = match m {
            Mode::Fixed => MuMode::Fixed,
            Mode::Optimized => MuMode::Optimized,
        };
    }
    let verbosity = if common.quiet {
        Verbosity::Quiet
    } else if common.verbose {
        Verbosity::Verbose
    } else {
        Verbosity::Normal
    };
    let outputs = Outputs {
        csv: common.out,
        summary: common.summary,
        verbosity,
    };
    ExitCode::from(run(command, &cfg, &outputs) as u8)
}
