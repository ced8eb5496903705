//! Command-line front end for `dmt-core`: tradeoff curves, schedule queries,
//! parallel Monte Carlo outage sweeps and a self-validation suite, all
//! written as deterministic CSV or JSON.

use std::path::{Path, PathBuf};

use thiserror::Error;

pub mod cli;
pub mod format;
pub mod manifest;
pub mod parallel;
pub mod validate;

#[derive(Debug, Error)]
pub enum ToolError {
    /// A flag value is unusable; the message names the flag.
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] dmt_core::Error),
    #[error("{0}")]
    Solver(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("parse error: {0}")]
    Parse(String),
}

impl ToolError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        ToolError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    /// 2 for bad input, 1 for everything that went wrong afterwards.
    pub fn exit_code(&self) -> i32 {
        match self {
            ToolError::Usage(_) => 2,
            ToolError::Core(dmt_core::Error::Domain { .. } | dmt_core::Error::Config(_)) => 2,
            _ => 1,
        }
    }
}
