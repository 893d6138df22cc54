use std::path::{Path, PathBuf};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{file}:{line}: malformed annotation line")]
    MalformedLine { file: PathBuf, line: usize },
    #[error("no image found for annotation {0}")]
    MissingImage(PathBuf),
    #[error("{path}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}")]
    Image {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },
    #[error("config: {0}")]
    Config(String),
    #[error("prediction and ground truth do not line up: {0}")]
    Mismatch(String),
    #[error(transparent)]
    Core(#[from] pseudolabel::Error),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn image(path: &Path, source: image::ImageError) -> Self {
        CliError::Image {
            path: path.to_path_buf(),
            source,
        }
    }
}
