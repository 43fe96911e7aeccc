use std::process::ExitCode;

use clap::Parser;

use blockade_cli::args::Cli;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = blockade_cli::run(&cli);
    match &result {
        Ok(summary) => println!("{}: {summary}", cli.command.name()),
        Err(e) => eprintln!("{}: error: {e}", cli.command.name()),
    }
    ExitCode::from(blockade_cli::exit_code(&result))
}
