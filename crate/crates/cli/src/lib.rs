//! Command-line front end for the `sdd_core` library.

pub mod args;
pub mod commands;
pub mod error;
pub mod ingest;
pub mod report;

use std::io::Write;

use args::{Cli, Command};
pub use error::CliError;

pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<(), CliError> {
    match &cli.command {
        Command::Simulate(a) => commands::simulate(a, out),
        Command::Fit(a) => commands::fit(a, out),
        Command::Describe(a) => commands::describe(a, out),
        Command::DensityGrid(a) => commands::density_grid(a, out),
        Command::ReproduceTable1(a) => commands::reproduce_table1(a, out),
    }
}
