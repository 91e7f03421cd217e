use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum CnnError {
    #[error("invalid network spec: {0}")]
    BadSpec(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("batch norm needs at least 2 temporal samples in train mode, got {0}")]
    BatchNormTooShort(usize),

    #[error("training split has no examples for class {0}")]
    EmptyClass(usize),

    #[error("training diverged (non-finite loss) at iteration {0}")]
    Diverged(usize),

    #[error("invalid training config: {0}")]
    BadConfig(String),

    #[error("weights file {path}: {message}")]
    WeightsFormat { path: PathBuf, message: String },

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CnnError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CnnError::Io {
            path: path.into(),
            source,
        }
    }
}
