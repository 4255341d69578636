use std::process::ExitCode;

use bilinear_cli::{execute, human, json, Cli};
use clap::Parser;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = execute(&cli.command);
    if let Some(msg) = &outcome.report.message {
        eprintln!("bilinear {}: {msg}", outcome.report.command);
    }
    if cli.command.common().json {
        println!("{}", json::to_string(&outcome.report));
    } else if outcome.report.result.is_some() {
        print!("{}", human::render(&outcome.report));
    }
    ExitCode::from(outcome.exit_code as u8)
}
