use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error(transparent)]
    Core(#[from] steadylab_core::Error),
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("expected verdict '{expected}', got '{actual}'")]
    ExpectMismatch { expected: String, actual: String },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use steadylab_core::Error as E;
        match self {
            Self::Validation(_) => 2,
            Self::Core(E::BlowUp { .. }) => 3,
            Self::Core(
                E::InvalidArgument(_)
                | E::HypothesisViolation(_)
                | E::NonInvertibleSymbol { .. }
                | E::Unsupported(_)
                | E::InsufficientData(_)
                | E::DegenerateInput(_),
            ) => 2,
            Self::Core(_) | Self::Io { .. } => 1,
            Self::ExpectMismatch { .. } => 4,
        }
    }
}
