use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    let args = fermion_decay::cli::Cli::parse();
    ExitCode::from(fermion_decay::cli::run(args))
}
