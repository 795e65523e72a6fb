mod args;
mod commands;
mod config;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Sub};
use config::{Command, RunConfig, SCHEMA_VERSION};
use error::CliError;

fn resolve(cli: Cli) -> Result<RunConfig, CliError> {
    let base = match &cli.config {
        Some(path) => Some(RunConfig::load(path)?),
        None => None,
    };
    let file_command = base.as_ref().map(|c| c.command.clone());
    let invoked = match &cli.command {
        Sub::Orbit(_) => "orbit",
        Sub::Bifurcation(_) => "bifurcation",
        Sub::Lyapunov(_) => "lyapunov",
        Sub::GateSearch(_) => "gate-search",
        Sub::Funcspace(_) => "funcspace",
        Sub::MapDump(_) => "map-dump",
    };
    let mismatch = |found: &Command| {
        CliError::Usage(format!(
            "--config describes a `{}` run; it cannot drive `{invoked}`",
            found.name()
        ))
    };
    macro_rules! merge {
        ($variant:ident, $args:expr) => {{
            let mut p = match file_command {
                None => Default::default(),
                Some(Command::$variant(p)) => p,
                Some(other) => return Err(mismatch(&other)),
            };
            $args.apply(&mut p);
            Command::$variant(p)
        }};
    }
    let command = match cli.command {
        Sub::Orbit(a) => merge!(Orbit, a),
        Sub::Bifurcation(a) => merge!(Bifurcation, a),
        Sub::Lyapunov(a) => merge!(Lyapunov, a),
        Sub::GateSearch(a) => merge!(GateSearch, a),
        Sub::Funcspace(a) => merge!(Funcspace, a),
        Sub::MapDump(a) => merge!(MapDump, a),
    };
    let (out, format, workers) = match base {
        Some(b) => (b.out, b.format, b.workers),
        None => (PathBuf::from("out"), None, None),
    };
    Ok(RunConfig {
        schema_version: SCHEMA_VERSION,
        out: cli.out.unwrap_or(out),
        format: cli.format.or(format),
        workers: cli.workers.or(workers),
        command,
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match resolve(cli).and_then(|cfg| commands::run(&cfg)) {
        Ok(written) => {
            for path in written.0 {
                println!("wrote {}", path.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
