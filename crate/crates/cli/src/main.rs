use std::process::ExitCode;

use clap::Parser;

use hyperperc_cli::args::Cli;
use hyperperc_cli::run::main_with;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match main_with(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
