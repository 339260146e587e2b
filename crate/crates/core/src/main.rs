use std::process::ExitCode;

use clap::Parser;

use dynmap::cli::{self, Args};

fn main() -> ExitCode {
    let args = Args::parse();
    match cli::execute(&args) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
