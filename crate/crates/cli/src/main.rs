//! `argdist` command-line interface.

mod args;
mod commands;
mod error;
mod output;
mod sweep_io;

use std::io::Write;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use crate::args::Cli;
use crate::error::{CliError, CliResult};
use crate::output::{open_sink, RunConfig};

fn report(err: &CliError) -> ExitCode {
    eprintln!("{}", err.to_json());
    ExitCode::from(err.exit_code() as u8)
}

fn execute(cli: &Cli) -> CliResult<()> {
    if cli.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global()
            .map_err(|e| CliError::Usage(format!("cannot configure thread pool: {e}")))?;
    }
    let config = RunConfig {
        threads: rayon::current_num_threads(),
        format: cli.format.unwrap_or_else(|| cli.command.default_format()),
        out: cli.out.as_deref(),
        command: &cli.command,
    };
    let mut buffer = Vec::new();
    commands::run(&config, &mut buffer)?;
    let mut sink = open_sink(config.out)?;
    sink.write_all(&buffer)?;
    sink.flush()?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            e.exit()
        }
        Err(e) => return report(&CliError::Usage(e.render().to_string().trim().to_string())),
    };
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => report(&e),
    }
}
