use std::fmt;

/// Errors of the runner, split by exit status.
#[derive(Debug)]
pub enum AppError {
    /// Bad configuration or flags: exit 2, nothing written.
    Config(String),
    /// A numerical routine failed during the run: exit 1.
    Core(asmlab_core::Error),
    Io(std::io::Error),
}

impl AppError {
    pub fn exit_code(&self) -> i32 {
        match self {
            AppError::Config(_) => 2,
            AppError::Core(asmlab_core::Error::InvalidInput(_) | asmlab_core::Error::DimensionTooLarge { .. }) => 2,
            AppError::Core(_) | AppError::Io(_) => 1,
        }
    }
}

impl fmt::Display for AppError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AppError::Config(m) => write!(f, "configuration error: {m}"),
            AppError::Core(e) => write!(f, "{e}"),
            AppError::Io(e) => write!(f, "io error: {e}"),
        }
    }
}

impl std::error::Error for AppError {}

impl From<asmlab_core::Error> for AppError {
    fn from(e: asmlab_core::Error) -> Self {
        AppError::Core(e)
    }
}

impl From<std::io::Error> for AppError {
    fn from(e: std::io::Error) -> Self {
        AppError::Io(e)
    }
}

pub fn config(msg: impl Into<String>) -> AppError {
    AppError::Config(msg.into())
}
