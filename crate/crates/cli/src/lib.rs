//! Batch front end for `evpos`.
//!
//! `evpos run <config>` builds the configured operator, certifies it, runs the
//! requested analysis and writes a JSON report plus CSV tables.
//! `evpos list-operators` prints the operator catalogue.
//!
//! Exit codes: 0 completed (whatever the verdict), 2 malformed input,
//! 3 numerical failure (diagnostics in the report), 4 unsupported combination.

pub mod config;
pub mod report;
pub mod run;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use evpos::models::catalogue;

pub use config::{parse_config, AnalysisConfig, AnalysisKind};
pub use run::{execute, Outcome, RunOptions};

pub const THREADS_VAR: &str = "EVPOS_THREADS";

/// An error with its exit code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn config(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }

    /// Bad arguments reaching the library are input errors; symmetry and
    /// Bessel-envelope violations are unsupported combinations; the rest numerical.
    pub fn from_core(e: &evpos::Error) -> Self {
        use evpos::Error::*;
        let code = match e {
            InvalidArgument { .. } | DimensionMismatch { .. } => 2,
            SymmetryViolation { .. } | BesselEnvelope { .. } => 4,
            _ => 3,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }

    pub fn context(mut self, what: &str) -> Self {
        self.message = format!("{what}: {}", self.message);
        self
    }
}

#[derive(Debug, Parser)]
#[command(name = "evpos", version, about = "Eventual positivity certificates for discretised semigroups")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the analysis described by a JSON config file.
    Run {
        config: PathBuf,
        /// Override `delta`.
        #[arg(long)]
        delta: Option<f64>,
        /// Override the grid end time.
        #[arg(long)]
        tmax: Option<f64>,
        /// Override the number of grid samples.
        #[arg(long)]
        samples: Option<usize>,
        /// Seed for synthetic operators.
        #[arg(long)]
        seed: Option<u64>,
        /// Leave timings out so reruns are byte-identical apart from the timestamp line.
        #[arg(long)]
        deterministic: bool,
        /// Output directory.
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
    },
    /// List the builtin operator kinds.
    ListOperators {
        /// One kind per line: kind, parameters, summary, tab-separated.
        #[arg(long)]
        machine: bool,
    },
}

pub fn list_operators(machine: bool) -> String {
    let mut out = String::new();
    for e in catalogue() {
        if machine {
            out.push_str(&format!("{}\t{}\t{}\n", e.kind, e.parameters, e.summary));
        } else {
            out.push_str(&format!("{:<20}{}\n{:<20}parameters: {}\n", e.kind, e.summary, "", e.parameters));
        }
    }
    out
}

/// Writes `contents` to `dir/name` through a temporary file in the same directory.
pub fn write_atomic(dir: &Path, name: &str, contents: &str) -> std::io::Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let target = dir.join(name);
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.as_file().sync_all()?;
    #[cfg(unix)]
    {
        use std::os::unix::fs::PermissionsExt;
        tmp.as_file().set_permissions(std::fs::Permissions::from_mode(0o644))?;
    }
    tmp.persist(&target).map_err(|e| e.error)?;
    Ok(target)
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .map_err(|_| Failure::config(format!("{THREADS_VAR}: expected a nonnegative integer, got `{raw}`")))?;
    if n > 0 {
        // Fails only if a pool already exists (repeated in-process runs).
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

fn run_command(config: &Path, opts: &RunOptions, stdout: &mut dyn Write) -> Result<u8, Failure> {
    let text = std::fs::read_to_string(config)
        .map_err(|e| Failure::config(format!("cannot read config {}: {e}", config.display())))?;
    let cfg = parse_config(&text)?;
    let outcome = execute(cfg, opts)?;
    let mut json = serde_json::to_string_pretty(&outcome.report)
        .map_err(|e| Failure::config(format!("report serialisation: {e}")))?;
    json.push('\n');
    let io = |e: std::io::Error| Failure::config(format!("output.dir {}: {e}", outcome.dir.display()));
    for (name, body) in &outcome.files {
        write_atomic(&outcome.dir, name, body).map_err(io)?;
    }
    let path = write_atomic(&outcome.dir, &outcome.report.config.output.report, &json).map_err(io)?;
    if let Some(c) = &outcome.report.certificate {
        let _ = writeln!(stdout, "certificate: {}", c.verdict.describe());
    }
    if let Some(e) = &outcome.report.error {
        let _ = writeln!(stdout, "error: {}", e.message);
    }
    let _ = writeln!(stdout, "report: {}", path.display());
    Ok(outcome.code)
}

/// Parses `args` and runs the command, returning the process exit code.
pub fn main_with<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = if code == 0 {
                write!(stdout, "{e}")
            } else {
                write!(stderr, "{e}")
            };
            return code;
        }
    };
    let result = std::panic::catch_unwind(std::panic::AssertUnwindSafe(|| -> Result<u8, Failure> {
        configure_threads()?;
        match cli.command {
            Command::ListOperators { machine } => {
                let _ = write!(stdout, "{}", list_operators(machine));
                Ok(0)
            }
            Command::Run {
                config,
                delta,
                tmax,
                samples,
                seed,
                deterministic,
                out,
            } => {
                let opts = RunOptions {
                    delta,
                    t_max: tmax,
                    samples,
                    seed,
                    deterministic,
                    out,
                };
                run_command(&config, &opts, stdout)
            }
        }
    }));
    match result {
        Ok(Ok(code)) => code,
        Ok(Err(f)) => {
            let _ = writeln!(stderr, "error: {}", f.message);
            f.code
        }
        Err(_) => {
            let _ = writeln!(stderr, "error: internal failure (panic) during the analysis");
            3
        }
    }
}
