use std::process::ExitCode;

use anyhow::Context;
use clap::Parser;

use stmcheck::frontend::cli::normalize_args;
use stmcheck::frontend::{check_text, Cli, Format};

fn run(cli: &Cli) -> anyhow::Result<u8> {
    let text = std::fs::read_to_string(&cli.file).with_context(|| format!("cannot read {}", cli.file))?;
    let report = check_text(&text, cli).with_context(|| cli.file.clone())?;
    match cli.format {
        Format::Text => print!("{}", report.to_text()),
        Format::Json => println!("{}", report.to_json()),
    }
    Ok(report.exit_code())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse_from(normalize_args(std::env::args_os())) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 3 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(3)
        }
    }
}
