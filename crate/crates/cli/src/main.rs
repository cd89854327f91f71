mod args;
mod commands;
mod curve_io;
mod error;
mod input;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};
use error::EXIT_USAGE;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    let result = match &cli.command {
        Command::Fit(a) => commands::fit(a),
        Command::Signif(a) => commands::signif(a),
        Command::Ci(a) => commands::ci(a),
        Command::Coverage(a) => commands::coverage(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
