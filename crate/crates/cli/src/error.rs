//! Error taxonomy shared by the library and the CLI. Exit codes: 1 usage,
//! 2 data, 3 internal.

use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{0}")]
    Usage(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("format error in {path}: {detail}")]
    Format { path: PathBuf, detail: String },

    #[error("{0}")]
    Data(String),

    #[error("pipeline stage {stage:?} failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("internal error: {0}")]
    Internal(String),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn format(path: impl Into<PathBuf>, detail: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            detail: detail.into(),
        }
    }

    pub fn data(detail: impl Into<String>) -> Self {
        Error::Data(detail.into())
    }

    /// Tags an error with the pipeline stage it occurred in.
    pub fn in_stage(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Usage(_) => 1,
            Error::Internal(_) => 3,
            Error::Stage { source, .. } => source.exit_code(),
            _ => 2,
        }
    }

    /// The stage tag, when this error carries one.
    pub fn stage(&self) -> Option<&'static str> {
        match self {
            Error::Stage { stage, .. } => Some(stage),
            _ => None,
        }
    }
}

macro_rules! from_core_error {
    ($($ty:ty),+ $(,)?) => {
        $(impl From<$ty> for Error {
            fn from(e: $ty) -> Self {
                Error::Data(e.to_string())
            }
        })+
    };
}

from_core_error!(
    edgeroute_core::grid::GridError,
    edgeroute_core::metrics::MetricError,
    edgeroute_core::predict::PredictError,
    edgeroute_core::router::TrainError,
    edgeroute_core::split::SplitError,
    edgeroute_core::stats::StatError,
    edgeroute_core::report::ReportError,
);

pub type Result<T> = std::result::Result<T, Error>;
