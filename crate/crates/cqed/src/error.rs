use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error("numerical: {0}")]
    Numerical(#[from] cqed_core::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("input: {0}")]
    Input(String),
}

impl CliError {
    /// 2 for bad configuration or input, 3 for numerical failure, 1 for IO.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Input(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io(_) => 1,
        }
    }
}
