//! Harness around `autoland-core`: configuration files, trace CSVs,
//! parallel sweeps and searches, reports, SVG plots and the CLI.

pub mod cli;
pub mod config;
pub mod parallel;
pub mod report;
pub mod svg;
pub mod trace_io;

use std::path::{Path, PathBuf};

pub use config::Config;
pub use trace_io::{load_trace, save_trace, TraceTable};

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("configuration: {0}")]
    Config(String),
    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },
    #[error("missing column `{0}`")]
    Schema(String),
    #[error(transparent)]
    Core(#[from] autoland_core::Error),
}

impl Error {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        Error::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}
