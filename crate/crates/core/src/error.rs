use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("index {index} out of bounds for {bound} {axis}")]
    OutOfBounds {
        index: usize,
        bound: usize,
        axis: &'static str,
    },

    #[error("unknown estimator kind `{0}`")]
    UnknownKind(String),

    #[error("unknown parameter `{param}` for {kind}")]
    UnknownParam { kind: String, param: String },

    #[error("parameter `{param}` of {kind}: expected {expected}, got {got}")]
    ParamType {
        kind: String,
        param: String,
        expected: String,
        got: String,
    },

    #[error("cannot resolve parameter path: no component named `{segment}` in {kind}")]
    ParamPath { kind: String, segment: String },

    #[error("invalid value for `{param}`: {reason}")]
    InvalidParam { param: String, reason: String },

    #[error("{kind} is not fitted yet; call fit first")]
    NotFitted { kind: String },

    #[error("{kind} does not support {method}")]
    Capability { kind: String, method: &'static str },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("{kind}: {reason}")]
    Fit { kind: String, reason: String },

    #[error("step `{name}`: {source}")]
    Step {
        name: String,
        #[source]
        source: Box<Error>,
    },

    #[error(
        "candidate {candidate}{}: {source}",
        .fold.map(|f| format!(", fold {f}")).unwrap_or_default()
    )]
    Candidate {
        candidate: usize,
        /// `None` when the candidate's parameters were rejected before fitting.
        fold: Option<usize>,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}:{line}: {reason}")]
    Ingest {
        path: PathBuf,
        line: usize,
        reason: String,
    },

    #[error("archive: {0}")]
    Format(String),

    #[error("archive checksum mismatch (stored {stored:016x}, computed {computed:016x})")]
    Checksum { stored: u64, computed: u64 },

    #[error("archive format version {found} is newer than supported version {supported}")]
    FutureVersion { found: u32, supported: u32 },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn fit(kind: &str, reason: impl Into<String>) -> Self {
        Error::Fit {
            kind: kind.to_string(),
            reason: reason.into(),
        }
    }

    pub(crate) fn invalid_param(param: &str, reason: impl Into<String>) -> Self {
        Error::InvalidParam {
            param: param.to_string(),
            reason: reason.into(),
        }
    }

    pub(crate) fn in_step(self, name: &str) -> Self {
        Error::Step {
            name: name.to_string(),
            source: Box::new(self),
        }
    }

    /// Strips `Step`/`Candidate` wrappers and returns the innermost error.
    pub fn root(&self) -> &Error {
        match self {
            Error::Step { source, .. } | Error::Candidate { source, .. } => source.root(),
            other => other,
        }
    }
}
