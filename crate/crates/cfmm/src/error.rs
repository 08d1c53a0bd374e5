use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] cfmm_core::Error),

    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },

    #[error("config: {0}")]
    Config(String),

    #[error("{}: malformed CSV: {reason}", path.display())]
    Csv { path: PathBuf, reason: String },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    /// `2` for bad input, `1` for a run that failed on valid input.
    pub fn exit_code(&self) -> u8 {
        use cfmm_core::Error as E;
        match self {
            Error::Core(E::InvalidParameter(_) | E::Dimension { .. } | E::NotPositiveDefinite) => 2,
            Error::Core(_) => 1,
            Error::Io { .. } | Error::Config(_) | Error::Csv { .. } | Error::Json(_) => 2,
        }
    }
}
