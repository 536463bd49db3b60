use std::process::ExitCode;

use clap::Parser;
use dribble_cli::{run, seed_override, Cli, SEED_OVERRIDE};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = seed_override(std::env::var(SEED_OVERRIDE).ok()).and_then(|seed| run(cli, seed));
    match result {
        Ok(text) => {
            println!("{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
