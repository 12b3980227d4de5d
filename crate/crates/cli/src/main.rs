use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::process::ExitCode;

mod args;
mod commands;
mod format;

use args::Command;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Clap(#[from] clap::Error),
    #[error("{0}")]
    Usage(String),
    #[error("cannot write output: {0}")]
    Output(#[from] csv::Error),
    #[error("cannot open output: {0}")]
    Io(#[from] io::Error),
}

fn run() -> Result<bool, CliError> {
    let cli = args::parse(std::env::args_os().collect())?;
    let (table, ok) = match &cli.command {
        Command::Keyrate(a) => (commands::keyrate(a)?, true),
        Command::Sweep(a) => (commands::sweep(a)?, true),
        Command::Gmax(a) => (commands::gmax(a)?, true),
        Command::Frontier(a) => (commands::frontier(a)?, true),
        Command::Verify(a) => commands::verify(a)?,
    };
    let out: Box<dyn Write> = match &cli.command.common().output {
        Some(path) => Box::new(BufWriter::new(File::create(path)?)),
        None => Box::new(io::stdout().lock()),
    };
    table.write(out)?;
    Ok(ok)
}

fn main() -> ExitCode {
    match run() {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("verification failed");
            ExitCode::from(1)
        }
        Err(CliError::Clap(e)) => {
            let _ = e.print();
            ExitCode::from(e.exit_code() as u8)
        }
        Err(e @ CliError::Usage(_)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
