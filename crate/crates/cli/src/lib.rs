//! Command-line front-end: configuration, subcommands and output encoding.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod figures;
pub mod table;
pub mod verify;

use std::path::Path;

pub use config::{Format, RunConfig};

/// Exit status of a successful run.
pub const EXIT_OK: i32 = 0;
/// Exit status when `verify` finds a failing check.
pub const EXIT_VERIFY_FAILED: i32 = 1;
/// Exit status for bad configuration and unsupported markets.
pub const EXIT_CONFIG: i32 = 2;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Model(#[from] netext_core::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        EXIT_CONFIG
    }
}

/// Writes `out` to `path`, or to standard output.
pub fn emit(out: &commands::Output, format: Format, path: Option<&Path>) -> Result<(), CliError> {
    match path {
        Some(p) => {
            let f = std::fs::File::create(p)?;
            let mut w = std::io::BufWriter::new(f);
            out.write(format, &mut w)?;
            std::io::Write::flush(&mut w)?;
            Ok(())
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            out.write(format, &mut lock)
        }
    }
}
