use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use lab::{catalogue, execute, ExperimentConfig, LabError};

#[derive(Debug, Parser)]
#[command(name = "lab", version, about = "Run finite-difference experiments on singular Schrödinger-type operators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// List the available presets.
    List,
    /// Run a configuration file or a named preset.
    Run {
        /// TOML configuration file.
        config: Option<PathBuf>,
        /// Preset to run; overrides the `preset` key of the file.
        #[arg(long)]
        preset: Option<String>,
        /// Override a configuration value, e.g. `--set potential.strength=6`.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::List => {
            let width = catalogue().iter().map(|p| p.name.len()).max().unwrap_or(0);
            for p in catalogue() {
                println!("{:width$}  {}  [{}]", p.name, p.description, p.property);
            }
            ExitCode::SUCCESS
        }
        Command::Run { config, preset, overrides } => {
            let resolved = match &config {
                Some(path) => ExperimentConfig::from_file(path, preset.as_deref(), &overrides),
                None => ExperimentConfig::resolve(None, preset.as_deref(), &overrides),
            };
            let code = match resolved.and_then(|c| execute(&c)) {
                Ok(summary) => {
                    for c in &summary.checks {
                        println!("{} {}", if c.pass { "PASS" } else { "FAIL" }, c.name);
                    }
                    if let Some(e) = &summary.error {
                        eprintln!("error: {e}");
                    }
                    summary.status.exit_code()
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    exit_code(&e)
                }
            };
            ExitCode::from(code as u8)
        }
    }
}

fn exit_code(e: &LabError) -> i32 {
    e.exit_code()
}
