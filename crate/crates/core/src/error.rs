use std::fmt;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Pipeline stage a failure is attributed to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Anchors,
    Features,
    Sampling,
    Training,
    Detection,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Stage::Anchors => "anchors",
            Stage::Features => "features",
            Stage::Sampling => "sampling",
            Stage::Training => "training",
            Stage::Detection => "detection",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: u64,
        message: String,
    },
    #[error("{0}: no edges found")]
    EmptyGraph(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("lookup error: {0}")]
    Lookup(String),
    #[error("sampling error: {0}")]
    Sampling(String),
    #[error("training error: {0}")]
    Training(String),
    #[error("data error: {0}")]
    Data(String),
    #[error("shape error: expected {expected} features, got {got}")]
    Shape { expected: usize, got: usize },
    #[error("evaluation error: {0}")]
    Evaluation(String),
    #[error("consistency error: {0}")]
    Consistency(String),
    #[error("input error: {0}")]
    Input(String),
    #[error("schema version mismatch in {what}: expected {expected}, found {found}")]
    Version {
        what: String,
        expected: u32,
        found: u32,
    },
    #[error("usage error: {0}")]
    Usage(String),
    #[error("[{stage}] {source}")]
    Stage {
        stage: Stage,
        #[source]
        source: Box<Error>,
    },
    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn at(stage: Stage) -> impl FnOnce(Error) -> Error {
        move |e| match e {
            already @ Error::Stage { .. } => already,
            other => Error::Stage {
                stage,
                source: Box::new(other),
            },
        }
    }

    /// Process exit code: 1 usage/config, 2 data, 3 internal.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Stage { source, .. } => source.exit_code(),
            Error::Io { .. } | Error::Config(_) | Error::Usage(_) | Error::Version { .. } => 1,
            Error::Parse { .. }
            | Error::EmptyGraph(_)
            | Error::Lookup(_)
            | Error::Sampling(_)
            | Error::Training(_)
            | Error::Data(_)
            | Error::Shape { .. }
            | Error::Evaluation(_)
            | Error::Consistency(_)
            | Error::Input(_)
            | Error::Csv(_) => 2,
            Error::Json(_) => 3,
        }
    }

    /// Stage the error was raised in, when it came out of the detection pipeline.
    pub fn stage(&self) -> Option<Stage> {
        match self {
            Error::Stage { stage, .. } => Some(*stage),
            _ => None,
        }
    }
}
