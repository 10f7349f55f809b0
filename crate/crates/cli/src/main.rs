use std::process::ExitCode;

use clap::Parser;
use memristim::cli::{key_help, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, args) = cli.verb.split();
    if args.iter().any(|a| a == "--keys") {
        print!("{}", key_help(command));
        return ExitCode::SUCCESS;
    }
    match cli.plan().and_then(|plan| memristim::execute(&plan).map(|_| plan)) {
        Ok(plan) => {
            println!("{}: wrote {}", command.name(), plan.out.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("memristim {}: {e}", command.name());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
