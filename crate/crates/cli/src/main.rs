//! `fock`: ground states, propagation and operator application from integral
//! files.

mod args;
mod commands;
mod model;

use std::io::Write;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;
use fock::Error;

use args::{normalize_argv, Cli, Command};

const EXIT_USAGE: u8 = 1;
const EXIT_PARSE: u8 = 2;
const EXIT_CONVERGENCE: u8 = 3;
const EXIT_STEP_FAILURE: u8 = 4;

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Parse { .. } | Error::Format(_) | Error::Io(_) => EXIT_PARSE,
        Error::NoConvergence { .. } => EXIT_CONVERGENCE,
        Error::StepFailure { .. } => EXIT_STEP_FAILURE,
        _ => EXIT_USAGE,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse_from(normalize_argv(std::env::args())) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(EXIT_USAGE),
            };
        }
    };
    let result = match &cli.command {
        Command::Enum(a) => commands::cmd_enum(a),
        Command::Gs(a) => commands::cmd_gs(a),
        Command::Prop(a) => commands::cmd_prop(a),
        Command::Apply(a) => commands::cmd_apply(a),
    };
    match result {
        Ok(text) => {
            let _ = std::io::stdout().lock().write_all(text.as_bytes());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("fock: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
