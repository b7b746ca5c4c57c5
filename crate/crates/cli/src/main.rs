use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::process::ExitCode;

use anyhow::Context;
use clap::Parser;
use qlb_cli::{run, write_rows, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(None) => ExitCode::SUCCESS,
        Ok(Some(failure)) => {
            eprintln!("qlb {}: {failure}", cli.command.name());
            ExitCode::from(3)
        }
        Err(err) => {
            eprintln!("qlb {}: error: {err:#}", cli.command.name());
            ExitCode::FAILURE
        }
    }
}

fn execute(cli: &Cli) -> anyhow::Result<Option<String>> {
    let result = run(&cli.command)?;
    let output = cli.command.output();
    match &output.out {
        Some(path) => {
            let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
            let mut w = BufWriter::new(file);
            write_rows(&result.rows, output.format, &mut w)?;
            w.flush()?;
        }
        None => {
            let stdout = io::stdout();
            let mut w = stdout.lock();
            write_rows(&result.rows, output.format, &mut w)?;
            w.flush()?;
        }
    }
    for note in &result.notes {
        eprintln!("{note}");
    }
    Ok(result.failure)
}
