//! Command-line front end: run configurations, experiment presets, mesh
//! inspection and subdivision, and the output files of a run.

pub mod commands;
pub mod config;
pub mod presets;
pub mod report;

use std::io;
use std::path::{Path, PathBuf};

use thiserror::Error;
use willmore_core::constraints::ConstraintError;
use willmore_core::descent::{DescentError, DescentFailure};
use willmore_core::fem::FemError;
use willmore_core::mesh::MeshError;

pub use commands::{cmd_check, cmd_run, cmd_subdivide, run_config, CheckReport, RunReport};
pub use config::RunConfig;
pub use presets::{Job, Preset};
pub use report::{JobSummary, TimingRow};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("file not found: {}", .0.display())]
    MissingFile(PathBuf),
    #[error("i/o error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Fem(#[from] FemError),
    #[error(transparent)]
    Constraint(#[from] ConstraintError),
    #[error("descent failed in job `{job}` after {iterations} iterations: {source}")]
    Descent {
        job: String,
        iterations: usize,
        #[source]
        source: DescentError,
    },
    #[error("mesh validation failed:\n{}", .0.join("\n"))]
    Validation(Vec<String>),
    #[error("csv output: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    /// 2 for usage errors and missing files, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::MissingFile(_) => 2,
            CliError::Mesh(MeshError::Io { source, .. }) if source.kind() == io::ErrorKind::NotFound => 2,
            _ => 1,
        }
    }

    pub(crate) fn missing_or_io(path: &Path, source: io::Error) -> Self {
        if source.kind() == io::ErrorKind::NotFound {
            CliError::MissingFile(path.to_path_buf())
        } else {
            CliError::Io {
                path: path.to_path_buf(),
                source,
            }
        }
    }

    pub(crate) fn descent(job: &str, f: DescentFailure) -> Self {
        CliError::Descent {
            job: job.to_string(),
            iterations: f.partial.as_ref().map_or(0, |p| p.iterations),
            source: f.error,
        }
    }
}
