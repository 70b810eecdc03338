mod args;
mod commands;
mod output;

use std::process::ExitCode;

use clap::Parser;

use crate::args::Cli;
use crate::commands::InputError;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli.command, &cli.global) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            // Library and flag validation failures are usage errors.
            if err.is::<amplispace::Error>() || err.is::<InputError>() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
