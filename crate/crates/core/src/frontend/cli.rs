//! Command-line options and the check driver.

use std::ffi::OsString;

use clap::{Parser, ValueEnum};

use super::report::{ConfigEcho, Entry, Report};
use super::{parse_named, FrontendError};
use crate::checker::{CheckConfig, CheckError, Checker};
use crate::syntax::FunContract;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

/// Static contract checker for STM programs.
#[derive(Clone, Debug, Parser)]
#[command(name = "stmcheck", version, about)]
pub struct Cli {
    /// Program to check (`.stm`).
    pub file: String,
    /// Only check this transaction.
    #[arg(long, value_name = "NAME")]
    pub transaction: Option<String>,
    /// Simplifier rewrite budget.
    #[arg(long, default_value_t = 1000)]
    pub fuel: usize,
    /// How far recursive functions are unfolded.
    #[arg(long, default_value_t = 3)]
    pub inline_depth: usize,
    /// Random inputs tried by the witness search.
    #[arg(long, default_value_t = 200)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Maximum number of orElse-free variants per transaction.
    #[arg(long, default_value_t = 64)]
    pub gamma_cap: usize,
    /// Print the transformed expression and contract of every variant.
    #[arg(long)]
    pub dump_pure: bool,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    #[arg(long)]
    pub no_witness_search: bool,
    /// Include wall-clock times in the report.
    #[arg(long)]
    pub timings: bool,
}

impl Cli {
    pub fn config(&self) -> CheckConfig {
        CheckConfig {
            fuel: self.fuel,
            inline_depth: self.inline_depth,
            samples: self.samples,
            seed: self.seed,
            gamma_cap: self.gamma_cap,
            witness_search: !self.no_witness_search,
            ..CheckConfig::default()
        }
    }

    /// Options for `file` with every flag at its default.
    pub fn for_file(file: &str) -> Cli {
        Cli::parse_from(["stmcheck", file])
    }
}

/// Drops the optional `check` subcommand so `stmcheck check f.stm` and
/// `stmcheck f.stm` mean the same.
pub fn normalize_args<I: IntoIterator<Item = OsString>>(args: I) -> Vec<OsString> {
    let mut v: Vec<OsString> = args.into_iter().collect();
    if v.len() > 2 && v[1] == "check" {
        v.remove(1);
    }
    v
}

/// Parses and checks `text`, which was read from `cli.file`.
pub fn check_text(text: &str, cli: &Cli) -> Result<Report, FrontendError> {
    let unit = parse_named(&cli.file, text)?;
    let program = &unit.program;
    if let Some(t) = &cli.transaction {
        if program.transaction(t).is_none() {
            return Err(FrontendError::UnknownTransaction(t.clone()));
        }
    }
    if !program.transactions.is_empty() && program.invariant.is_none() {
        return Err(FrontendError::MissingInvariant);
    }
    let checker = Checker::new(program, cli.config())?;

    let mut transactions = Vec::new();
    for tx in &checker.program().transactions {
        if cli.transaction.as_ref().is_some_and(|t| *t != tx.name) {
            continue;
        }
        let r = checker.check_transaction(&tx.name)?;
        transactions.push(Entry::from_check(&r, cli.dump_pure, cli.timings));
    }

    let mut functions = Vec::new();
    if cli.transaction.is_none() {
        for f in checker.program().functions.values() {
            if !matches!(f.contract, Some(FunContract::Plain(_))) {
                continue;
            }
            match checker.check_function(&f.name) {
                Ok(r) => functions.push(Entry::from_check(&r, cli.dump_pure, cli.timings)),
                Err(e @ CheckError::MissingCalleeContract { .. }) => functions.push(Entry::unknown(&f.name, e.to_string())),
                Err(e) => return Err(e.into()),
            }
        }
    }

    let config = ConfigEcho { fuel: cli.fuel, inline_depth: cli.inline_depth, samples: cli.samples, seed: cli.seed };
    Ok(Report::new(cli.file.clone(), transactions, functions, config))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn check_is_optional() {
        let a = normalize_args(["stmcheck", "check", "x.stm"].map(OsString::from));
        assert_eq!(a, ["stmcheck", "x.stm"].map(OsString::from));
        let b = normalize_args(["stmcheck", "check"].map(OsString::from));
        assert_eq!(b.len(), 2);
    }

    #[test]
    fn defaults() {
        let c = Cli::for_file("x.stm");
        assert_eq!(c.config(), CheckConfig::default());
        assert_eq!(c.format, Format::Text);
    }
}
