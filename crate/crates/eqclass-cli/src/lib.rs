//! Command-line harness around the `eqclass` structures.
//!
//! The succinct structures relabel elements internally, so the harness owns
//! the piece they deliberately cannot afford: a bidirectional map between
//! the caller's element ids and the current internal labels, carried next
//! to the structure in its dump file and re-threaded through every
//! relabeling the dynamic structure emits. Space reports keep the two
//! separate.

pub mod commands;
pub mod ingest;
pub mod usermap;

use std::fmt;
use std::io;

pub use commands::{cmd_bench, cmd_build, cmd_query, cmd_stats, BenchOptions, Kind};

/// Harness failure with its process exit code: usage 1, parse 2, io 3.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Parse {
        path: String,
        line: Option<u64>,
        msg: String,
    },
    Io {
        context: String,
        source: io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Parse { .. } => 2,
            CliError::Io { .. } => 3,
        }
    }

    pub fn io(context: impl Into<String>) -> impl FnOnce(io::Error) -> CliError {
        let context = context.into();
        move |source| CliError::Io { context, source }
    }

    pub fn parse(path: &str, line: Option<u64>, msg: impl Into<String>) -> CliError {
        CliError::Parse {
            path: path.to_string(),
            line,
            msg: msg.into(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "usage error: {msg}"),
            CliError::Parse { path, line, msg } => match line {
                Some(l) => write!(f, "parse error: {path}:{l}: {msg}"),
                None => write!(f, "parse error: {path}: {msg}"),
            },
            CliError::Io { context, source } => write!(f, "io error: {context}: {source}"),
        }
    }
}

impl std::error::Error for CliError {}
