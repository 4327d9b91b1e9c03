use levywave_core::Error as CoreError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),

    #[error("invalid experiment: {0}")]
    Validation(String),

    #[error("numeric failure: {0}")]
    Runtime(#[from] CoreError),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Config(_) | Self::Validation(_) => 2,
            Self::Runtime(_) | Self::Io(_) => 3,
        }
    }
}

/// Core errors raised while building an experiment are validation errors.
pub(crate) fn invalid(context: &str) -> impl FnOnce(CoreError) -> CliError + '_ {
    move |e| CliError::Validation(format!("{context}: {e}"))
}
