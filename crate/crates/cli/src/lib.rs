//! The `scomma` command line: compile, solve, check, inspect and bench.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Args, Parser, Subcommand};
use scomma_core::backend::{list_targets, BackendError, Targets};
use scomma_core::solver::{SearchConfig, Unsupported};
use scomma_core::Diagnostics;
use thiserror::Error;

pub mod bench;
mod check;
mod compile;
mod inspect;
mod solve;

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    /// Diagnostics in the inputs, a failed check or a failed benchmark.
    pub const DIAGNOSTICS: i32 = 1;
    pub const USAGE: i32 = 2;
    pub const INFEASIBLE: i32 = 3;
    pub const UNSUPPORTED: i32 = 4;
    /// The time limit ran out before any solution was found.
    pub const UNKNOWN: i32 = 5;
}

/// Extra descriptor directories, separated like `PATH`.
pub const TARGET_PATH_VAR: &str = "SCOMMA_TARGET_PATH";

#[derive(Debug, Parser)]
#[command(name = "scomma", version, about = "Compile and solve object-oriented constraint models")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Flatten a model and emit it for a target.
    Compile(CompileArgs),
    /// Search for solutions with the embedded solver.
    Solve(SolveArgs),
    /// Check a solution file against a model.
    Check(CheckArgs),
    /// Print flattening statistics and model sizes.
    Inspect(Input),
    /// List the available targets.
    Targets,
    /// Run every model of a corpus directory.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
pub struct Input {
    /// The model file.
    pub model: PathBuf,
    /// A data file; imports of the model are read as well.
    pub data: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CompileArgs {
    #[command(flatten)]
    pub input: Input,
    /// Target name, or a path to a `.bd` descriptor.
    #[arg(long, short, conflicts_with = "emit_flat")]
    pub target: Option<String>,
    /// Write the flat model (the default).
    #[arg(long)]
    pub emit_flat: bool,
    /// Output file or directory; `-` for standard output.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
    /// Skip the target's rewrite rules.
    #[arg(long)]
    pub no_rewrites: bool,
    /// Print node counts per flattening pass to standard error.
    #[arg(long)]
    pub trace: bool,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub input: Input,
    /// Enumerate every solution, ignoring any objective.
    #[arg(long, conflicts_with = "limit")]
    pub all: bool,
    /// Stop after this many solutions.
    #[arg(long, value_parser = positive)]
    pub limit: Option<usize>,
    /// Append search statistics.
    #[arg(long)]
    pub stats: bool,
    /// Variable and value order, e.g. `first_fail,min` or `input_order,max`.
    #[arg(long, value_parser = strategy, default_value = "first_fail,min")]
    pub strategy: SearchConfig,
    /// Wall-clock limit in seconds.
    #[arg(long, value_parser = seconds)]
    pub time_limit: Option<Duration>,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[command(flatten)]
    pub input: Input,
    /// The solution file: one `name = value` per line.
    #[arg(long, short)]
    pub solution: PathBuf,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// A directory with one subdirectory (or `.scm` file) per benchmark.
    pub corpus: PathBuf,
    /// Where to write the line-delimited JSON report.
    #[arg(long, default_value = "scomma-bench.jsonl")]
    pub jsonl: PathBuf,
    /// Solver time limit per benchmark, in seconds.
    #[arg(long, value_parser = seconds, default_value = "10")]
    pub time_limit: Duration,
    /// Solutions to search for in satisfaction models.
    #[arg(long, value_parser = positive, default_value = "1")]
    pub limit: usize,
    /// Worker threads; all cores by default.
    #[arg(long, value_parser = positive)]
    pub jobs: Option<usize>,
}

fn positive(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(n) if n >= 1 => Ok(n),
        _ => Err(format!("expected a positive integer, got `{s}`")),
    }
}

fn seconds(s: &str) -> Result<Duration, String> {
    s.parse::<f64>()
        .ok()
        .and_then(|x| Duration::try_from_secs_f64(x).ok())
        .ok_or_else(|| format!("expected a number of seconds, got `{s}`"))
}

fn strategy(s: &str) -> Result<SearchConfig, String> {
    SearchConfig::default()
        .with_strategy(s)
        .ok_or_else(|| format!("unknown strategy `{s}`; use <first_fail|input_order>,<min|max>"))
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Diagnostics(#[from] Diagnostics),
    #[error("error: {0}")]
    Backend(#[from] BackendError),
    #[error("error: {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("error: {0}")]
    Usage(String),
    #[error("error: {0}\nhint: `scomma compile --target <name>` can still emit the model for an external solver")]
    Unsupported(Unsupported),
    #[error("error: {0}")]
    Solver(String),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Backend(BackendError::UnknownTarget(_)) => exit::USAGE,
            CliError::Unsupported(_) => exit::UNSUPPORTED,
            _ => exit::DIAGNOSTICS,
        }
    }

    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.display().to_string(),
            source,
        }
    }
}

/// Built-in targets plus descriptors from `SCOMMA_TARGET_PATH`. Missing
/// directories are reported and skipped.
pub fn targets(err: &mut dyn Write) -> Result<Targets, CliError> {
    let mut dirs = Vec::new();
    if let Some(p) = std::env::var_os(TARGET_PATH_VAR) {
        for d in std::env::split_paths(&p).filter(|d| !d.as_os_str().is_empty()) {
            if d.is_dir() {
                dirs.push(d);
            } else {
                let _ = writeln!(err, "warning: {TARGET_PATH_VAR}: `{}` is not a directory", d.display());
            }
        }
    }
    let t = list_targets(&dirs)?;
    for w in &t.warnings {
        let _ = writeln!(err, "warning: {w}");
    }
    Ok(t)
}

/// Parses `args` (program name first) and runs the command. Returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(err, "{}", e.render());
            return if e.use_stderr() { exit::USAGE } else { exit::OK };
        }
    };
    let r = match cli.command {
        Command::Compile(a) => compile::run(&a, out, err),
        Command::Solve(a) => solve::run(&a, out, err),
        Command::Check(a) => check::run(&a, out),
        Command::Inspect(a) => inspect::run(&a, out, err),
        Command::Targets => inspect::list(out, err),
        Command::Bench(a) => bench::run(&a, out, err),
    };
    match r {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "{e}");
            e.code()
        }
    }
}

pub(crate) fn load(input: &Input) -> Result<scomma_core::Compiled, CliError> {
    Ok(scomma_core::compile_files(&input.model, input.data.as_deref())?)
}

pub(crate) fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}
