use std::path::{Path, PathBuf};

use gwshm_core::edge::ImageError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Data(String),
    #[error("{0}")]
    Manifest(String),
    #[error("{0}")]
    SchemaMismatch(String),
    #[error("no baseline reference for path {path_id} at {temperature_c} C")]
    MissingBaseline { path_id: String, temperature_c: f64 },
    #[error("feature table has no baseline rows; training is unsupervised on healthy data only")]
    NoBaselineRows,
    #[error(transparent)]
    Core(#[from] gwshm_core::Error),
    #[error(transparent)]
    Image(#[from] ImageError),
}

pub type Result<T> = std::result::Result<T, CliError>;

impl CliError {
    pub fn io(path: impl AsRef<Path>, source: std::io::Error) -> Self {
        CliError::Io { path: path.as_ref().to_path_buf(), source }
    }

    /// Stable tag printed in `error[<kind>]: ...`.
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Io { .. } => "io",
            CliError::Data(_) | CliError::Core(_) => "data",
            CliError::Manifest(_) => "manifest",
            CliError::SchemaMismatch(_) => "schema-mismatch",
            CliError::MissingBaseline { .. } => "missing-baseline",
            CliError::NoBaselineRows => "no-baseline-rows",
            CliError::Image(e) => e.kind(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Image(_) => 4,
            _ => 2,
        }
    }

    /// One line, safe for line-oriented parsing.
    pub fn render(&self) -> String {
        let msg = self.to_string().replace(['\n', '\r'], " ");
        format!("error[{}]: {}", self.kind(), msg)
    }
}
