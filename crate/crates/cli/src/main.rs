//! `hybrid-bell` command-line tool.
//!
//! Exit codes: 0 success, 1 unparseable arguments, config or input files, 2 domain errors,
//! 3 solver failures. Once the output directory is known, every run writes `manifest.json`.

mod args;
mod commands;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::error::ErrorKind;
use clap::{CommandFactory, Parser};
use hybrid_bell::HybridError;
use serde::Serialize;
use serde_json::Value;

use args::{config_to_args, Cli, Command};

#[derive(Serialize)]
struct Manifest {
    tool: &'static str,
    version: &'static str,
    core_version: &'static str,
    command: Option<&'static str>,
    /// The resolved subcommand with every default filled in; usable as a `--config` file.
    config: Option<Command>,
    config_file: Option<PathBuf>,
    argv: Vec<String>,
    seed: Option<u64>,
    status: &'static str,
    exit_code: u8,
    error: Option<String>,
    outputs: Vec<PathBuf>,
    summary: Value,
    wall_time_seconds: f64,
}

fn exit_code(e: &HybridError) -> u8 {
    match e {
        HybridError::Solver(_) => 3,
        HybridError::Parse(_) => 1,
        _ => 2,
    }
}

/// Replaces the subcommand with the one described by a JSON config file.
fn load_config(path: &PathBuf) -> Result<Command, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
    let value: Value = serde_json::from_str(&text).map_err(|e| format!("config {} is not JSON: {e}", path.display()))?;
    let mut argv = vec!["hybrid-bell".to_string()];
    argv.extend(config_to_args(&value)?);
    let cli = Cli::try_parse_from(&argv).map_err(|e| format!("invalid config {}:\n{e}", path.display()))?;
    cli.command.ok_or_else(|| "config names no subcommand".to_string())
}

fn main() -> ExitCode {
    let start = Instant::now();
    let argv: Vec<String> = std::env::args().collect();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            let ok = matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion);
            return ExitCode::from(if ok { 0 } else { 1 });
        }
    };
    let mut manifest = Manifest {
        tool: "hybrid-bell",
        version: env!("CARGO_PKG_VERSION"),
        core_version: hybrid_bell::VERSION,
        command: None,
        config: None,
        config_file: cli.config.clone(),
        argv: argv[1..].to_vec(),
        seed: None,
        status: "error",
        exit_code: 1,
        error: None,
        outputs: Vec::new(),
        summary: Value::Null,
        wall_time_seconds: 0.0,
    };
    let command = match (&cli.config, cli.command) {
        (Some(path), None) => load_config(path),
        (Some(_), Some(_)) => Err("give either a subcommand or --config, not both".to_string()),
        (None, Some(c)) => Ok(c),
        (None, None) => {
            let _ = Cli::command().print_help();
            return ExitCode::from(1);
        }
    };
    if let Err(e) = std::fs::create_dir_all(&cli.out_dir) {
        eprintln!("error: cannot create output directory {}: {e}", cli.out_dir.display());
        return ExitCode::from(2);
    }
    match command {
        Err(msg) => {
            eprintln!("error: {msg}");
            manifest.error = Some(msg);
        }
        Ok(cmd) => {
            manifest.command = Some(cmd.name());
            manifest.seed = cmd.seed();
            match commands::run(&cmd, &cli.out_dir) {
                Ok(out) => {
                    manifest.status = "ok";
                    manifest.exit_code = 0;
                    manifest.outputs = out.outputs;
                    manifest.summary = out.summary;
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    manifest.exit_code = exit_code(&e);
                    manifest.error = Some(e.to_string());
                }
            }
            manifest.config = Some(cmd);
        }
    }
    manifest.wall_time_seconds = start.elapsed().as_secs_f64();
    let path = cli.out_dir.join("manifest.json");
    if let Err(e) = hybrid_bell::io::write_json(&path, &manifest) {
        eprintln!("error: cannot write {}: {e}", path.display());
        return ExitCode::from(manifest.exit_code.max(2));
    }
    ExitCode::from(manifest.exit_code)
}
