//! Command-line front end: Green's-function tables, kernel matrices,
//! ground-state solves, parameter sweeps and the acceptance suite.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod output;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use config::{Params, RunConfig};

const EXIT_CODES: &str = "\
Exit status:
  0  success
  1  a computation failed, a solve failed, or an acceptance check failed
  2  usage error (bad flag, out-of-range parameter, empty --g list, bad FRACBOUND_THREADS)
  3  config file unreadable or invalid
  4  output could not be written

Environment:
  FRACBOUND_THREADS  caps the worker pool (positive integer)";

#[derive(Debug, Parser)]
#[command(name = "fracbound", version, about, after_help = EXIT_CODES)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    params: Params,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Table of G(r) from the oracle and the branch dispatcher
    Greens,
    /// Table of dG/dkappa from the series and a centred difference
    Dgreens,
    /// Birman-Schwinger kernel matrix (csv) or its summary (json)
    Kernel {
        /// Which matrix to write as csv
        #[arg(long, value_enum, default_value = "full")]
        part: KernelPart,
    },
    /// Bound-state solve for each g
    GroundState,
    /// Bound-state solves over every (alpha, g) pair
    Sweep,
    /// Run the acceptance suite
    Validate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KernelPart {
    Full,
    Sing,
    Fin,
    /// `full` with the trapezoid diagonal correction
    FullCorrected,
    /// `fin` with the trapezoid diagonal correction
    FinCorrected,
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Config(String),
    Compute(String),
    Failed(String),
    Io(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Compute(_) | CliError::Failed(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Config(_) => 3,
            CliError::Io(_) => 4,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Compute(m) => write!(f, "computation failed: {m}"),
            CliError::Failed(m) => write!(f, "{m}"),
            CliError::Io(m) => write!(f, "output error: {m}"),
        }
    }
}

fn init_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("FRACBOUND_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Usage(format!("FRACBOUND_THREADS must be a positive integer, got '{raw}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Usage(e.to_string()))
}

fn run(cli: Cli) -> Result<(), CliError> {
    init_threads()?;
    let cfg = RunConfig::resolve(cli.params)?;
    let mut out: Box<dyn Write> = match &cfg.out {
        Some(path) => Box::new(BufWriter::new(
            File::create(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    };
    let result = match cli.command {
        Command::Greens => commands::greens(&cfg, &mut out),
        Command::Dgreens => commands::dgreens(&cfg, &mut out),
        Command::Kernel { part } => commands::kernel(&cfg, part, &mut out),
        Command::GroundState => commands::ground_state(&cfg, &mut out),
        Command::Sweep => commands::sweep(&cfg, &mut out),
        Command::Validate => commands::validate(&cfg, &mut out),
    };
    // records already rendered are flushed even when some solves failed
    let flushed = out.flush().map_err(|e| CliError::Io(e.to_string()));
    result.and(flushed)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("fracbound: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
