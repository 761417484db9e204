//! Command-line front end: MatrixMarket I/O, one subcommand per operation,
//! the pinned-case suite and the random splitting generator.
//!
//! Every command prints a JSON [`Report`] on standard output and a short
//! summary on standard error. Exit status is 0 when every check passes, 1
//! when a check or the operation itself fails, and 2 on usage or input
//! errors.

mod commands;
pub mod generate;
pub mod mtx;
pub mod report;
pub mod suite;

use std::ffi::OsString;
use std::io::Write;

use thiserror::Error;

pub use commands::Cli;
pub use report::{Check, Report};

use crate::error::Error;

/// Environment variable overriding the identity tolerance `eq_tol`.
pub const EQ_TOL_VAR: &str = "ALTSPLIT_EQ_TOL";

pub const EXIT_PASS: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Read(#[from] mtx::ReadError),
    #[error("cannot write {path}: {source}")]
    Write { path: String, source: std::io::Error },
    #[error(transparent)]
    Core(#[from] Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Read(_) | CliError::Write { .. } => EXIT_USAGE,
            CliError::Core(e) => match e {
                Error::ShapeMismatch { .. }
                | Error::EmptyMatrix { .. }
                | Error::NonFinite { .. }
                | Error::NotSquare { .. }
                | Error::SizeCap { .. }
                | Error::InvalidParameter(_) => EXIT_USAGE,
                _ => EXIT_CHECK_FAILED,
            },
        }
    }
}

/// Parses `args` (program name first), runs the command and writes the
/// report to `out` and diagnostics to `err`. Returns the exit status.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    use clap::Parser;

    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_PASS };
            let rendered = e.render().to_string();
            let _ = if e.use_stderr() {
                write!(err, "{rendered}")
            } else {
                write!(out, "{rendered}")
            };
            return code;
        }
    };
    let command = cli.command_name();
    match cli.execute() {
        Ok(report) => {
            let _ = writeln!(out, "{}", report.to_json());
            let _ = write!(err, "{}", report.summary());
            if report.pass {
                EXIT_PASS
            } else {
                EXIT_CHECK_FAILED
            }
        }
        Err(e) => {
            let code = e.exit_code();
            if code == EXIT_CHECK_FAILED {
                let mut report = Report::new(command);
                report.result("error", e.to_string());
                report.pass = false;
                let _ = writeln!(out, "{}", report.to_json());
            }
            let _ = writeln!(err, "error: {e}");
            code
        }
    }
}
