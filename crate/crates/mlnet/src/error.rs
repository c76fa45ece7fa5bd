use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] mlnet_core::Error),

    #[error("realization {index}: {source}")]
    Realization {
        index: u64,
        #[source]
        source: mlnet_core::Error,
    },

    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: mlnet_core::Error,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: invalid experiment file: {source}", path.display())]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error("structure file {} not found; {hint}", path.display())]
    MissingStructure { path: PathBuf, hint: String },

    #[error("{}: {source}", path.display())]
    Structure {
        path: PathBuf,
        #[source]
        source: mlnet_core::Error,
    },

    #[error("invalid experiment: {0}")]
    Schema(String),

    #[error("thread pool: {0}")]
    Pool(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> Error {
        let path = path.into();
        move |source| Error::Io { path, source }
    }

    pub(crate) fn context(context: impl Into<String>) -> impl FnOnce(mlnet_core::Error) -> Error {
        let context = context.into();
        move |source| Error::Context { context, source }
    }
}
