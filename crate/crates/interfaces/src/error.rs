use std::path::PathBuf;

use cardionet_core::analysis::AnalysisError;
use cardionet_core::inference::InferenceError;
use cardionet_core::io::{DatasetError, FormatError};
use cardionet_core::learning::LearningError;
use cardionet_core::structure::StructureError;
use cardionet_core::ModelError;
use thiserror::Error;

/// Every failure the CLI and the HTTP service can report.
#[derive(Debug, Error)]
pub enum AppError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Inference(#[from] InferenceError),
    #[error(transparent)]
    Learning(#[from] LearningError),
    #[error(transparent)]
    Structure(#[from] StructureError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{0}")]
    Request(String),
}

impl AppError {
    pub fn name(&self) -> &'static str {
        match self {
            AppError::Model(e) => e.name(),
            AppError::Format(e) => e.name(),
            AppError::Dataset(e) => e.name(),
            AppError::Inference(e) => e.name(),
            AppError::Learning(e) => e.name(),
            AppError::Structure(e) => e.name(),
            AppError::Analysis(e) => e.name(),
            AppError::Io { .. } => "IoError",
            AppError::Request(_) => "RequestError",
        }
    }

    /// Whether the failure is the caller's fault rather than the server's.
    pub fn is_client_error(&self) -> bool {
        !matches!(self, AppError::Io { .. })
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        AppError::Io {
            path: path.into(),
            source,
        }
    }
}
