use std::path::PathBuf;

/// Errors for signal construction, integration, and file I/O.
#[derive(Debug, thiserror::Error)]
pub enum SignalError {
    #[error("empty signal")]
    EmptySignal,

    #[error("invalid time step dt = {0} (must be > 0 and finite)")]
    InvalidDt(f64),

    #[error("channel `{channel}` has length {len}, expected {expected}")]
    LengthMismatch {
        channel: String,
        len: usize,
        expected: usize,
    },

    #[error("non-finite sample in channel `{channel}` at index {index}")]
    NonFiniteSample { channel: String, index: usize },

    #[error("expected a single-channel signal, got {0} channels")]
    NotSingleChannel(usize),

    #[error("signal too short: {len} samples, need at least {need}")]
    TooShort { len: usize, need: usize },

    #[error("no channel named `{0}`")]
    NoSuchChannel(String),

    #[error("missing metadata: {0}")]
    MissingMetadata(PathBuf),

    #[error("{path}: line {line}, field `{field}`: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        field: String,
        message: String,
    },

    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },

    #[error("manifest entry `{path}`: label `{label}` is not in the declared class set")]
    UnknownLabel { path: String, label: String },

    #[error("manifest references missing file: {0}")]
    MissingEntry(PathBuf),

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl SignalError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        SignalError::Io {
            path: path.into(),
            source,
        }
    }
}
