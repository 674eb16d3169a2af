use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Core(#[from] dce_core::Error),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type CliResult<T> = std::result::Result<T, CliError>;

impl CliError {
    /// 2 config, 3 numerical contract (positivity/trace), 4 convergence or window, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Core(e) if e.is_contract_violation() => 3,
            CliError::Core(e) if e.is_convergence_failure() => 4,
            CliError::Core(dce_core::Error::Domain(_) | dce_core::Error::InvalidDimension(_)) => 2,
            _ => 1,
        }
    }
}
