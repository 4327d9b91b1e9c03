use std::process::ExitCode;

use clap::Parser;
use levywave::cli::{execute, Args};

fn main() -> ExitCode {
    let args = Args::parse();
    match execute(&args) {
        Ok(out) => {
            for line in &out.summaries {
                println!("{line}");
            }
            println!("wrote {} and {}", out.csv.display(), out.json.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("levywave: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
