use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use smartcar_core::sim::{default_until_ms, load_scenario, run, ScenarioEvent};
use smartcar_core::Config;

#[derive(Parser)]
#[command(
    name = "smartcar",
    version,
    about = "Run smart-car safety scenarios against virtual hardware"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute a scenario and emit the report.
    Run {
        /// Scenario script (`t=<ms> <event> <args...>` per line).
        #[arg(long)]
        scenario: PathBuf,
        /// Controller configuration (`key = value` per line).
        #[arg(long)]
        config: PathBuf,
        /// Simulation horizon in ms; defaults to a margin after the last event.
        #[arg(long)]
        until_ms: Option<u64>,
        /// Write the report here instead of stdout.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Parse a scenario without running it.
    Check {
        /// Scenario script to validate.
        #[arg(long)]
        scenario: PathBuf,
    },
}

const EXIT_SCENARIO_ERROR: u8 = 1;
const EXIT_INVARIANT_VIOLATION: u8 = 2;

fn read_scenario(path: &Path) -> Result<Vec<ScenarioEvent>, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    load_scenario(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn read_config(path: &Path) -> Result<Config, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    Config::load(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Check { scenario } => match read_scenario(&scenario) {
            Ok(events) => {
                println!("ok: {} events", events.len());
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(EXIT_SCENARIO_ERROR)
            }
        },
        Command::Run {
            scenario,
            config,
            until_ms,
            report,
        } => {
            let (events, config) = match read_scenario(&scenario).and_then(|ev| Ok((ev, read_config(&config)?))) {
                Ok(loaded) => loaded,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(EXIT_SCENARIO_ERROR);
                }
            };
            let until = until_ms.unwrap_or_else(|| default_until_ms(&events, &config));
            let result = run(&events, &config, until);
            let text = result.to_text();
            match report {
                Some(path) => {
                    if let Err(e) = fs::write(&path, &text) {
                        eprintln!("error: {}: {e}", path.display());
                        return ExitCode::from(EXIT_SCENARIO_ERROR);
                    }
                }
                None => print!("{text}"),
            }
            let violations = result.violations();
            if violations.is_empty() {
                ExitCode::SUCCESS
            } else {
                for v in violations {
                    eprintln!("invariant violation: {v}");
                }
                ExitCode::from(EXIT_INVARIANT_VIOLATION)
            }
        }
    }
}
