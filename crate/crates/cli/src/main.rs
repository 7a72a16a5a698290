mod commands;
mod config;
mod output;

use std::fs;
use std::io::Write;
use std::process::ExitCode;

use clap::Parser;

use commands::{execute, CliResult};
use config::{Cli, Invocation, RunConfig};

fn resolve(cli: Cli) -> CliResult<RunConfig> {
    match cli.invocation {
        Invocation::Run(command) => {
            let format = cli.format.unwrap_or_else(|| command.default_format());
            Ok(RunConfig {
                command,
                format,
                output: cli.output,
            })
        }
        Invocation::Replay { config } => {
            let text = fs::read_to_string(&config)?;
            let mut cfg: RunConfig = serde_json::from_str(&text)?;
            if let Some(format) = cli.format {
                cfg.format = format;
            }
            if cli.output.is_some() {
                cfg.output = cli.output;
            }
            Ok(cfg)
        }
    }
}

fn run(cli: Cli) -> CliResult<()> {
    let save = cli.save_config.clone();
    let cfg = resolve(cli)?;
    if let Some(path) = save {
        fs::write(path, serde_json::to_string_pretty(&cfg)? + "\n")?;
    }
    let emitted = execute(&cfg)?;
    match &cfg.output {
        Some(path) => fs::write(path, &emitted.main)?,
        None => std::io::stdout().write_all(emitted.main.as_bytes())?,
    }
    if let Some(lookup) = emitted.lookup {
        let target = match &cfg.command {
            config::Command::Calibrate(a) => a.lookup_out.clone(),
            _ => None,
        };
        match target {
            Some(path) => fs::write(path, lookup)?,
            None => std::io::stderr().write_all(lookup.as_bytes())?,
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code)
        }
    }
}
