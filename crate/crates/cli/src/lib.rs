//! The `dee` command-line tool as a library: [`run`] parses arguments,
//! executes one command and returns what would be printed, so the binary is
//! a thin wrapper and tests need no subprocesses.

pub mod args;
mod commands;
mod report;
mod verify;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::Parser;

pub use args::{Cli, Command, FileConfig};
pub use report::Report;

/// Exit code for bad usage, unreadable input, or failed validation.
pub const EXIT_USAGE: i32 = 1;
/// Exit code when `verify-bounds` finds a violated bound.
pub const EXIT_CHECK_FAILED: i32 = 2;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] dee::Error),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{}: {source}", path.display())]
    Input { path: PathBuf, source: dee::Error },
    #[error("config {}: {msg}", path.display())]
    Config { path: PathBuf, msg: String },
}

/// What a command produced: the report, files to write, and an exit code.
#[derive(Debug)]
pub struct CommandOutput {
    pub report: Report,
    pub files: Vec<(PathBuf, String)>,
    pub code: i32,
}

/// Process result of one invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                Outcome {
                    code: EXIT_USAGE,
                    stdout: String::new(),
                    stderr: text,
                }
            } else {
                Outcome {
                    code: 0,
                    stdout: text,
                    stderr: String::new(),
                }
            };
        }
    };
    match execute(cli) {
        Ok((code, stdout)) => Outcome {
            code,
            stdout,
            stderr: String::new(),
        },
        Err(e) => Outcome {
            code: EXIT_USAGE,
            stdout: String::new(),
            stderr: format!("error: {e}\n"),
        },
    }
}

fn load_config(path: Option<&Path>) -> Result<FileConfig, CliError> {
    let Some(path) = path else {
        return Ok(FileConfig::default());
    };
    let text = read_file(path)?;
    toml::from_str(&text).map_err(|e| CliError::Config {
        path: path.to_path_buf(),
        msg: e.to_string(),
    })
}

fn execute(cli: Cli) -> Result<(i32, String), CliError> {
    let start = Instant::now();
    let file = load_config(cli.config.as_deref())?;
    let threads = cli.threads.or(file.threads);
    if threads == Some(0) {
        return Err(CliError::Usage("--threads must be at least 1".into()));
    }
    if let Some(p) = &cli.report {
        check_writable(p)?;
    }
    let work = || commands::dispatch(&cli.command, &file);
    let mut out = match threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Usage(format!("cannot start {n} worker threads: {e}")))?
            .install(work)?,
        None => work()?,
    };
    if cli.timing {
        out.report.push("wall_time_s", format!("{:.3}", start.elapsed().as_secs_f64()));
    }
    let text = out.report.render();
    for (path, contents) in &out.files {
        write_atomic(path, contents)?;
    }
    if let Some(p) = &cli.report {
        write_atomic(p, &text)?;
    }
    Ok((out.code, text))
}

pub(crate) fn read_file(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Fails early if `path` cannot be created, so no command computes for a
/// long time and then fails on its output.
pub(crate) fn check_writable(path: &Path) -> Result<(), CliError> {
    let dir = parent_dir(path);
    if dir.is_dir() {
        Ok(())
    } else {
        Err(CliError::Io {
            path: path.to_path_buf(),
            source: std::io::Error::new(std::io::ErrorKind::NotFound, "directory does not exist"),
        })
    }
}

fn parent_dir(path: &Path) -> &Path {
    match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    }
}

/// Writes through a temporary file in the same directory and renames it.
fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    let io = |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut tmp = tempfile::NamedTempFile::new_in(parent_dir(path)).map_err(io)?;
    tmp.write_all(contents.as_bytes()).map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}
