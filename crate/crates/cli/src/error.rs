use randsum_core::Error as CoreError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Invalid or inconsistent configuration (exit code 2).
    #[error("{0}")]
    Config(String),

    /// A numerical routine failed (exit code 3).
    #[error("{0}")]
    Numerical(String),

    /// Reading or writing files failed (exit code 3).
    #[error("{0}")]
    Io(String),
}

impl CliError {
    /// A core error raised while interpreting config section `section`.
    pub fn field(section: &str, e: CoreError) -> Self {
        match e {
            CoreError::Numerical { .. } => CliError::Numerical(format!("{section}: {e}")),
            _ => CliError::Config(format!("{section}: {e}")),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) | CliError::Io(_) => 3,
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::Numerical { .. } => CliError::Numerical(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
