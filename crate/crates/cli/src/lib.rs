//! Command-line harness for the `alphageom` experiments.
//!
//! Each subcommand resolves an [`ExperimentConfig`], runs it and writes an
//! [`ExperimentRecord`] as JSON lines or CSV. Exit codes: 0 pass, 1 a check
//! failed, 2 usage error, 3 numerically inconclusive.

pub mod commands;
pub mod config;
pub mod record;

use std::ffi::OsString;
use std::fmt;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand};

pub use commands::run;

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/cli.md")]
mod book_cli {}
pub use config::{CommandName, ExperimentConfig, Overrides, UsageError};
pub use record::{Case, ExperimentRecord, Status, Value};

const OUTPUT_HELP: &str = "\
Output: JSON lines by default. The first line echoes the effective config,
then one line per case, then a summary with version and wall-clock time.
Floats carry 17 significant digits.

CSV columns (--format csv), one row per case field:
  index         case number, in run order
  label         case label
  status        pass, fail or inconclusive
  inconclusive  true when the case could not be decided
  field         field name; list entries appear as name[k]
  value         field value

Exit codes: 0 pass, 1 a check failed, 2 usage error, 3 inconclusive.";

#[derive(Debug, Parser)]
#[command(name = "alphageom", version, about = "Numerical experiments on α-connections and monotone metrics")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Sub,
}

#[derive(Debug, Args)]
pub struct CommandArgs {
    /// TOML file of flat `key = value` settings; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,

    #[command(flatten)]
    pub overrides: Overrides,
}

#[derive(Debug, Subcommand)]
pub enum Sub {
    /// Duality defect of metric/connection pairs on parametrized families.
    Duality(CommandArgs),
    /// Metric preserved by the pair of parallel transports along a curve.
    TransportDuality(CommandArgs),
    /// Potential and dual coordinates in affine charts of positive matrices.
    Potential(CommandArgs),
    /// Duality defects of WYD against other candidate metrics.
    UniquenessScan(CommandArgs),
    /// Contraction of metrics under random channels.
    Monotonicity(CommandArgs),
    /// Flatness on positive matrices and path dependence on states.
    Flatness(CommandArgs),
    /// Convex combination of ±1 connections against the α-connection.
    ConvexityFailure(CommandArgs),
    /// Relative-entropy projection onto Gibbs families.
    EntropyProjection(CommandArgs),
    /// Metric values and kernel/direct agreement on random states.
    MetricTable(CommandArgs),
    /// The experiment named by `command` in the config file.
    Run(CommandArgs),
}

impl Sub {
    fn split(self) -> (Option<CommandName>, CommandArgs) {
        use CommandName as C;
        match self {
            Sub::Duality(a) => (Some(C::Duality), a),
            Sub::TransportDuality(a) => (Some(C::TransportDuality), a),
            Sub::Potential(a) => (Some(C::Potential), a),
            Sub::UniquenessScan(a) => (Some(C::UniquenessScan), a),
            Sub::Monotonicity(a) => (Some(C::Monotonicity), a),
            Sub::Flatness(a) => (Some(C::Flatness), a),
            Sub::ConvexityFailure(a) => (Some(C::ConvexityFailure), a),
            Sub::EntropyProjection(a) => (Some(C::EntropyProjection), a),
            Sub::MetricTable(a) => (Some(C::MetricTable), a),
            Sub::Run(a) => (None, a),
        }
    }
}

#[derive(Debug)]
pub enum CliError {
    Usage(UsageError),
    Numeric(alphageom::Error),
    Output(std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Numeric(_) => 1,
            CliError::Usage(_) | CliError::Output(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(e) => e.fmt(f),
            CliError::Numeric(e) => write!(f, "numerical failure: {e}"),
            CliError::Output(e) => write!(f, "cannot write output: {e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<UsageError> for CliError {
    fn from(e: UsageError) -> Self {
        CliError::Usage(e)
    }
}

impl From<alphageom::Error> for CliError {
    fn from(e: alphageom::Error) -> Self {
        match e {
            alphageom::Error::Parameter { name, value, reason } => {
                CliError::Usage(UsageError::new(name, format!("{value}: {reason}")))
            }
            other => CliError::Numeric(other),
        }
    }
}

fn parse<I, T>(args: I) -> Result<Cli, clap::Error>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let mut cmd = Cli::command().after_help(OUTPUT_HELP);
    let names: Vec<String> = cmd.get_subcommands().map(|s| s.get_name().to_string()).collect();
    for name in names {
        cmd = cmd.mut_subcommand(name, |s| s.after_help(OUTPUT_HELP));
    }
    let matches = cmd.try_get_matches_from(args)?;
    Cli::from_arg_matches(&matches)
}

/// Resolves the config of a parsed command line.
pub fn resolve(cli: Cli) -> Result<ExperimentConfig, CliError> {
    let (command, args) = cli.command.split();
    let file = match &args.config {
        Some(path) => config::read_config_file(path)?,
        None => Overrides::default(),
    };
    Ok(ExperimentConfig::resolve(command, args.overrides, file)?)
}

/// Runs a full command line, writing the record to `--output` or `stdout`,
/// and returns the exit code.
pub fn main_with_args<I, T>(args: I, stdout: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match parse(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(cli, stdout) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn execute(cli: Cli, stdout: &mut dyn Write) -> Result<i32, CliError> {
    let config = resolve(cli)?;
    let record = run(&config)?;
    match &config.output {
        Some(path) => {
            let file = std::fs::File::create(path).map_err(CliError::Output)?;
            record
                .emit(config.format, std::io::BufWriter::new(file))
                .map_err(CliError::Output)?;
        }
        None => record.emit(config.format, &mut *stdout).map_err(CliError::Output)?,
    }
    eprintln!(
        "{}: {} ({} cases, {:.2} s)",
        config.command.as_str(),
        record.status().as_str(),
        record.cases.len(),
        record.wall_clock_seconds
    );
    Ok(record.exit_code())
}
