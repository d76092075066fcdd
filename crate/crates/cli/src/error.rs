use std::io;
use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{origin}: {message}")]
    ProblemFile { origin: String, message: String },
    #[error("cannot read {}: {source}", .path.display())]
    Read { path: PathBuf, source: io::Error },
    #[error("cannot write {}: {source}", .path.display())]
    Write { path: PathBuf, source: io::Error },
    #[error("{0}")]
    Core(#[from] tripint_core::Error),
    #[error("csv output: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    pub const INPUT: u8 = 2;
    pub const NUMERICAL: u8 = 3;

    pub fn usage(msg: impl Into<String>) -> Self {
        Self::Usage(msg.into())
    }

    /// 3 for numerical failures, 2 for everything the user has to fix.
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Core(e) if e.is_numerical() => Self::NUMERICAL,
            _ => Self::INPUT,
        }
    }
}
