//! Batch front-end: one JSON config in, CSV tables out.

// Guards written as `!(x > 0.0)` are deliberate: they reject NaN together
// with the out-of-range sign, which `x <= 0.0` would not.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod config;
mod output;
mod runner;

use clap::{Parser, ValueEnum};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    IdealTau,
    Thermo,
    TauField,
    CondensateScan,
    NsCheck,
    Gk,
    Validate,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::IdealTau => "ideal-tau",
            Command::Thermo => "thermo",
            Command::TauField => "tau-field",
            Command::CondensateScan => "condensate-scan",
            Command::NsCheck => "ns-check",
            Command::Gk => "gk",
            Command::Validate => "validate",
        }
    }
}

/// Equilibrium thermodynamics of quantum mixtures: batch runs from a
/// JSON config, CSV outputs.
#[derive(Debug, Parser)]
#[command(name = "mixtherm", version)]
pub struct Cli {
    /// Subcommand to run.
    #[arg(value_enum)]
    pub command: Command,
    /// Path to the JSON run configuration.
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory (default: the config's directory).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads (fallback: MIXTHERM_THREADS).
    #[arg(long)]
    pub threads: Option<usize>,
    /// RNG seed, reserved for randomized corpora.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Permit commands marked EXPERIMENTAL (condensate-scan).
    #[arg(long)]
    pub allow_experimental: bool,
}

/// CLI failure modes, mapped onto the documented exit codes.
#[derive(Debug)]
pub enum CliError {
    /// Exit 2: the config (or CLI environment) is invalid. The string
    /// pair is (JSON-pointer-ish path, message).
    Config { path: String, message: String },
    /// Exit 3: a numeric routine failed.
    Numeric { message: String },
    /// Exit 4: experimental branch without --allow-experimental.
    Experimental { message: String },
}

impl CliError {
    pub fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        CliError::Config {
            path: path.into(),
            message: message.into(),
        }
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config { .. } => 2,
            CliError::Numeric { .. } => 3,
            CliError::Experimental { .. } => 4,
        }
    }

    fn record(&self) -> serde_json::Value {
        match self {
            CliError::Config { path, message } => serde_json::json!({
                "error": {"kind": "config", "path": path, "message": message}
            }),
            CliError::Numeric { message } => serde_json::json!({
                "error": {"kind": "numeric", "message": message}
            }),
            CliError::Experimental { message } => serde_json::json!({
                "error": {"kind": "experimental", "message": message}
            }),
        }
    }
}

impl From<mixtherm::Error> for CliError {
    fn from(e: mixtherm::Error) -> Self {
        CliError::Numeric {
            message: e.to_string(),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match runner::run(&cli) {
        Ok(report) => {
            println!("{}", serde_json::to_string_pretty(&report).unwrap());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", e.record());
            ExitCode::from(e.exit_code())
        }
    }
}
