//! `hypercone`: batch front end for the heat-flow library. Emits JSON
//! (schema 1) on stdout or `--out`, CSV traces under `--trace-dir`.
//!
//! Exit status: 0 on success, 1 on invalid input, 2 on numerical failure
//! or a failed check.

mod commands;
mod params;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use params::Params;

#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Numerical(String),
    Io(String),
}

impl From<hypercone::Error> for CliError {
    fn from(e: hypercone::Error) -> Self {
        if e.is_numerical() {
            CliError::Numerical(e.to_string())
        } else {
            CliError::Validation(e.to_string())
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) | CliError::Io(_) => 1,
            CliError::Numerical(_) => 2,
        }
    }
}

#[derive(Parser)]
#[command(name = "hypercone", version, about = "Sharp heat-flow hypercontractivity experiments")]
struct Cli {
    /// JSON config whose keys mirror the flags; flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand)]
enum Command {
    /// M(p, q), the sharp bound and the extremizer parameters.
    Constants(Params),
    /// Numerical operator norm against the sharp bound.
    Norm(Params),
    /// Monotone quantity along the optimal exponent flow.
    Flow(Params),
    /// Log-Sobolev deficits.
    Logsob(Params),
    /// Large-time behaviour of the heat kernel.
    LiLimit(Params),
    /// Munn-Perelman constants and topology report.
    Rigidity(Params),
    /// The full acceptance suite.
    Verify(Params),
}

fn load_config(path: &PathBuf) -> Result<Params, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("HYPERCONE_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Validation(format!("HYPERCONE_THREADS must be a positive integer, got '{raw}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Validation(e.to_string()))
}

fn run(cli: Cli) -> Result<bool, CliError> {
    configure_threads()?;
    let config = cli.config.as_ref().map(load_config).transpose()?.unwrap_or_default();
    let (name, params) = match cli.command {
        Some(cmd) => {
            let (name, flags) = match cmd {
                Command::Constants(p) => ("constants", p),
                Command::Norm(p) => ("norm", p),
                Command::Flow(p) => ("flow", p),
                Command::Logsob(p) => ("logsob", p),
                Command::LiLimit(p) => ("li-limit", p),
                Command::Rigidity(p) => ("rigidity", p),
                Command::Verify(p) => ("verify", p),
            };
            if config.command.as_deref().is_some_and(|c| c != name) {
                return Err(CliError::Validation(format!(
                    "config is for '{}' but '{name}' was requested",
                    config.command.as_deref().unwrap_or_default()
                )));
            }
            (name.to_string(), flags.overlay(config))
        }
        None => {
            let name = config.command.clone().ok_or_else(|| {
                CliError::Validation("no subcommand given and the config has no 'command'".into())
            })?;
            (name, config)
        }
    };
    let outcome = match name.as_str() {
        "constants" => commands::constants(&params)?,
        "norm" => commands::norm(&params)?,
        "flow" => commands::flow(&params)?,
        "logsob" => commands::logsob(&params)?,
        "li-limit" => commands::li_limit(&params)?,
        "rigidity" => commands::rigidity(&params)?,
        "verify" => commands::verify(&params)?,
        other => return Err(CliError::Validation(format!("unknown command '{other}'"))),
    };
    if name == "rigidity" && params.format.as_deref() == Some("text") {
        let text = outcome.document["text"].as_str().unwrap_or_default().to_string();
        emit(&params, &text)?;
    } else {
        if let Some(f) = params.format.as_deref().filter(|&f| f != "json") {
            return Err(CliError::Validation(format!("unknown format '{f}'")));
        }
        let json = serde_json::to_string_pretty(&outcome.document).expect("JSON values serialise");
        emit(&params, &(json + "\n"))?;
    }
    Ok(outcome.passed)
}

fn emit(params: &Params, text: &str) -> Result<(), CliError> {
    match &params.out {
        Some(path) => fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("hypercone: a check failed");
            ExitCode::from(2)
        }
        Err(e) => {
            let msg = match &e {
                CliError::Validation(m) | CliError::Numerical(m) | CliError::Io(m) => m,
            };
            eprintln!("hypercone: {msg}");
            ExitCode::from(e.exit_code())
        }
    }
}
