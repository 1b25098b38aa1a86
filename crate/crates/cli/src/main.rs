use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    let cli = allrel_cli::Cli::parse();
    match allrel_cli::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
