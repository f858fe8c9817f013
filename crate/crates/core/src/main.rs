use std::process::ExitCode;

use clap::Parser;
use mbstat::cli::{execute, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli.command) {
        Ok(summary) => {
            match serde_json::to_string(&summary) {
                Ok(line) => eprintln!("{line}"),
                Err(e) => eprintln!("mbstat: summary: {e}"),
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("mbstat: {e}");
            ExitCode::FAILURE
        }
    }
}
