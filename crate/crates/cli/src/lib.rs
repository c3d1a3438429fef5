//! Parameter sweeps over the wirescatter solver with deterministic CSV and
//! JSON output.

pub mod commands;
pub mod config;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub use commands::{run, Output};
pub use config::{validate, Format, ScanConfig, Validated};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid configuration:\n  {}", .0.join("\n  "))]
    Config(Vec<String>),
    #[error("solver error: {0}")]
    Solver(#[from] wirescatter::Error),
    #[error("{context}: {source}")]
    Io { context: String, source: std::io::Error },
}

impl CliError {
    /// 2 for configuration and usage problems, 1 for failures while solving.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Solver(_) | CliError::Io { .. } => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Modes,
    Phaseshifts,
    Amplitudes,
    Cir,
    Bound,
    Pole,
}

#[derive(Debug, Parser)]
#[command(name = "wirescatter", version, about = "Scattering of a short-range potential in a cylindrical waveguide")]
pub struct Cli {
    #[command(subcommand)]
    pub sub: Sub,
}

#[derive(Debug, Subcommand)]
pub enum Sub {
    /// Transverse mode table.
    Modes(RunArgs),
    /// Free-space phase shifts on a momentum grid.
    Phaseshifts(RunArgs),
    /// Effective 1D amplitudes over a `k0` or scattering-length grid.
    Amplitudes(RunArgs),
    /// Effective coupling over a scattering-length grid.
    Cir(RunArgs),
    /// Bound-state energy over an `a/d_U` grid.
    Bound(RunArgs),
    /// Refine a T-matrix pole from a seed.
    Pole(RunArgs),
}

impl Sub {
    pub fn split(&self) -> (Command, &RunArgs) {
        match self {
            Sub::Modes(a) => (Command::Modes, a),
            Sub::Phaseshifts(a) => (Command::Phaseshifts, a),
            Sub::Amplitudes(a) => (Command::Amplitudes, a),
            Sub::Cir(a) => (Command::Cir, a),
            Sub::Bound(a) => (Command::Bound, a),
            Sub::Pole(a) => (Command::Pole, a),
        }
    }
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,
    /// Worker threads; falls back to WIRESCATTER_WORKERS.
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long = "l-max")]
    pub l_max: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Csv,
    Json,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        }
    }
}

/// Worker count from the flag, then the environment. `None` lets rayon decide.
pub fn worker_count(flag: Option<usize>) -> Result<Option<usize>, CliError> {
    if let Some(n) = flag {
        return if n == 0 { Err(CliError::Config(vec!["--workers must be at least 1".into()])) } else { Ok(Some(n)) };
    }
    match std::env::var("WIRESCATTER_WORKERS") {
        Ok(s) => match s.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(CliError::Config(vec![format!("WIRESCATTER_WORKERS must be a positive integer, got {s:?}")])),
        },
        Err(_) => Ok(None),
    }
}

/// Reads, validates and runs one invocation, writing the result to `--out`
/// or returning it for standard output.
pub fn execute(cli: &Cli) -> Result<Output, CliError> {
    let (command, cli) = cli.sub.split();
    let text = std::fs::read_to_string(&cli.config)
        .map_err(|e| CliError::Config(vec![format!("cannot read {}: {e}", cli.config.display())]))?;
    let validated = validate(&text, cli.config.parent())?;
    let format = cli
        .format
        .map(Format::from)
        .or(validated.config.output.as_ref().map(|o| o.format))
        .unwrap_or_default();
    let out_path = cli.out.clone().or_else(|| validated.config.output.as_ref().and_then(|o| o.path.clone()));
    let opts = commands::RunOptions { l_max: cli.l_max.or(validated.config.l_max), format };
    let output = match worker_count(cli.workers)? {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| CliError::Config(vec![format!("cannot start {n} workers: {e}")]))?;
            pool.install(|| run(command, &validated, &opts))?
        }
        None => run(command, &validated, &opts)?,
    };
    let mut output = output;
    if let Some(path) = out_path {
        std::fs::write(&path, &output.text)
            .map_err(|source| CliError::Io { context: format!("cannot write {}", path.display()), source })?;
        output.written_to = Some(path);
    }
    Ok(output)
}
