use std::io;
use std::path::{Path, PathBuf};

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    /// A file that does not follow its declared format.
    #[error("{}: {field}: {detail}", path.display())]
    Format {
        path: PathBuf,
        field: &'static str,
        detail: String,
    },
    #[error("{}:{line}: {detail}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        detail: String,
    },
    #[error(transparent)]
    Core(#[from] resvc_core::Error),
    #[error("{0}")]
    Usage(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn io_at(path: &Path) -> impl FnOnce(io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

pub(crate) fn format_at(path: &Path, field: &'static str, detail: impl Into<String>) -> Error {
    Error::Format {
        path: path.to_path_buf(),
        field,
        detail: detail.into(),
    }
}
