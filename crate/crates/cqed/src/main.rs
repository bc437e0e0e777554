use std::process::ExitCode;

use clap::Parser;
use cqed::experiments::{Command, Globals};
use cqed::runner::execute;

/// Circuit-QED experiment runner.
#[derive(Debug, Parser)]
#[command(name = "cqed", version)]
struct Cli {
    #[command(flatten)]
    globals: Globals,
    #[command(subcommand)]
    command: Command,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli.globals, &cli.command) {
        Ok(summary) => {
            print!("{}", summary.report);
            for f in &summary.files {
                eprintln!("wrote {}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("cqed: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
