//! Command-line front end of the memristor simulator: configuration,
//! orchestration and every file format (CSV, JSON, PPM/PGM).

pub mod cli;
pub mod commands;
pub mod config;
pub mod error;
pub mod io;
pub mod pnm;

use cli::Plan;
use error::CliResult;
use io::OutDir;

/// File holding the effective configuration of a run.
pub const CONFIG_FILE: &str = "config.txt";

/// Writes the effective configuration and runs the command.
pub fn execute(plan: &Plan) -> CliResult<()> {
    let out = OutDir::create(&plan.out)?;
    out.write_text(CONFIG_FILE, &plan.config.to_text())?;
    commands::dispatch(&plan.config, &out)
}
