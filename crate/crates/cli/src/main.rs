use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use sdd_cli::args::Cli;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let stdout = std::io::stdout();
    let mut out = std::io::BufWriter::new(stdout.lock());
    let result = sdd_cli::run(&cli, &mut out);
    let flushed = out.flush();
    match (result, flushed) {
        (Ok(()), Ok(())) => ExitCode::SUCCESS,
        (Err(e), _) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
        (Ok(()), Err(e)) => {
            eprintln!("error: writing output: {e}");
            ExitCode::from(3)
        }
    }
}
