use thiserror::Error;

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const CONFIG: i32 = 2;
    pub const DATA: i32 = 3;
    pub const NUMERICAL: i32 = 4;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] gprice::Error),

    #[error("configuration error: {0}")]
    Config(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use gprice::Error as E;
        match self {
            CliError::Config(_) | CliError::Core(E::Config(_)) => exit::CONFIG,
            CliError::Core(E::Numerical(_)) => exit::NUMERICAL,
            CliError::Core(_) => exit::DATA,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
