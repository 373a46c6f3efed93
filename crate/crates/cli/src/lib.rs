//! Command-line front end: run configs in, JSON and CSV artifacts out.

use std::fmt;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

pub mod commands;
pub mod config;

pub use config::RunConfig;

/// Exit status for a completed run whose acceptance checks failed.
pub const EXIT_VALIDATION_FAILED: i32 = 2;
/// Exit status for errors.
pub const EXIT_ERROR: i32 = 1;

/// Diagnostic with a machine-readable code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliError {
    pub code: String,
    pub message: String,
}

impl CliError {
    pub fn new(code: &str, message: impl Into<String>) -> Self {
        Self { code: code.into(), message: message.into() }
    }

    /// One-line JSON object `{"code": ..., "message": ...}`.
    pub fn to_json(&self) -> String {
        serde_json::json!({ "code": self.code, "message": self.message }).to_string()
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.code, self.message)
    }
}

impl std::error::Error for CliError {}

impl From<birkhoff::Error> for CliError {
    fn from(e: birkhoff::Error) -> Self {
        Self::new(e.code(), e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        let code = if e.kind() == std::io::ErrorKind::BrokenPipe { "BROKEN_PIPE" } else { "IO_ERROR" };
        Self::new(code, e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(name = "birkhoff", version, about = "Edgeworth and local limit expansions for Birkhoff sums")]
pub struct Cli {
    /// Print the JSON Schema of the run config and exit.
    #[arg(long)]
    pub print_schema: bool,
    /// Omit the timestamp from reports so that reruns are byte-identical.
    #[arg(long, global = true)]
    pub deterministic: bool,
    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Edgeworth,
    Mlclt,
    Pmf,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScanKind {
    Radius,
    Decay,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build the model and summarize its normalization.
    ModelValidate { config: PathBuf },
    /// λ-jet by both methods, projection constants and spectral data.
    Jet {
        config: PathBuf,
        #[arg(long)]
        order: Option<usize>,
    },
    /// Expansion polynomials of the configured order.
    Expand {
        config: PathBuf,
        #[arg(long)]
        order: Option<usize>,
    },
    /// Monte Carlo Birkhoff sums.
    Sample {
        config: PathBuf,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run validation suites and write a report.
    Validate {
        config: PathBuf,
        #[arg(long, value_enum, default_value = "all")]
        suite: Suite,
    },
    /// Spectral radius or decay of the twisted operator along `a:b:step`.
    Scan {
        config: PathBuf,
        #[arg(long, value_enum)]
        what: ScanKind,
        #[arg(long = "s-range")]
        s_range: String,
    },
}

/// Run a parsed command line, writing the primary artifact to `out`.
/// Returns the process exit status.
pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<i32, CliError> {
    if cli.print_schema {
        out.write_all(config::SCHEMA.as_bytes())?;
        return Ok(0);
    }
    let Some(command) = &cli.command else {
        return Err(CliError::new("USAGE", "a subcommand is required (see --help)"));
    };
    let ok = match command {
        Command::ModelValidate { config } => commands::model_validate(&RunConfig::load(config)?, out)?,
        Command::Jet { config, order } => commands::jet(&RunConfig::load(config)?, *order, out)?,
        Command::Expand { config, order } => commands::expand(&RunConfig::load(config)?, *order, out)?,
        Command::Sample { config, n, trials, seed } => commands::sample(&RunConfig::load(config)?, *n, *trials, *seed, out)?,
        Command::Validate { config, suite } => commands::validate(&RunConfig::load(config)?, *suite, cli.deterministic, out)?,
        Command::Scan { config, what, s_range } => commands::scan(&RunConfig::load(config)?, *what, s_range, out)?,
    };
    Ok(if ok { 0 } else { EXIT_VALIDATION_FAILED })
}

/// Parse `argv` and run; usage errors map to exit status 1.
pub fn main_with_args<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(out, "{e}");
                return 0;
            }
            let _ = writeln!(err, "{}", CliError::new("USAGE", e.to_string().trim_end()).to_json());
            return EXIT_ERROR;
        }
    };
    match run(&cli, out) {
        Ok(code) => code,
        Err(e) if e.code == "BROKEN_PIPE" => 0,
        Err(e) => {
            let _ = writeln!(err, "{}", e.to_json());
            EXIT_ERROR
        }
    }
}
