use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] structure_core::Error),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io { path: path.into(), source }
    }

    /// 2 for bad configuration or input, 3 for numerical failure, 4 for I/O.
    pub fn exit_code(&self) -> i32 {
        use structure_core::Error as E;
        match self {
            Self::Config(_) => 2,
            Self::Io { .. } => 4,
            Self::Core(E::Io(_)) => 4,
            Self::Core(
                E::InvalidConfig(_)
                | E::Parse(_)
                | E::InvalidGrid(_)
                | E::GridMismatch(_)
                | E::DimensionMismatch(_)
                | E::ThetaOutOfRange { .. }
                | E::ResolutionMismatch { .. }
                | E::TooLarge { .. },
            ) => 2,
            Self::Core(_) => 3,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
