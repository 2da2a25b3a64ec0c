mod cli;
mod commands;
mod error;
mod output;

use std::process::ExitCode;

use clap::Parser;

use crate::cli::{Cli, Command};
use crate::error::{CliResult, EXIT_MATH, EXIT_USAGE};
use crate::output::{emit, to_value, Status};

fn execute(cli: &Cli) -> CliResult<Status> {
    let config = to_value(cli)?;
    let report = match &cli.command {
        Command::Finite(a) => commands::finite::run(a, config)?,
        Command::Bound(a) => commands::bound::run(a, config)?,
        Command::Simulate(a) => commands::simulate::run(a, config)?,
        Command::Verify(a) => commands::verify::run(a, config)?,
    };
    emit(&report, cli.format, cli.output.as_deref())?;
    Ok(report.envelope.status)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_USAGE) } else { ExitCode::SUCCESS };
        }
    };
    match execute(&cli) {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(Status::Fail) => ExitCode::from(EXIT_MATH),
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
