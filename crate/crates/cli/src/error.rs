use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Validation(String),

    #[error("{context}: {source}")]
    Core {
        context: String,
        #[source]
        source: rydion_core::Error,
    },

    #[error("{0}")]
    Io(#[from] std::io::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    /// 2 for bad input, 3 when a numerical procedure did not converge, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Core { source, .. } if source.is_convergence() => 3,
            CliError::Core {
                source:
                    rydion_core::Error::InvalidParameter(_) | rydion_core::Error::Unstable { .. },
                ..
            } => 2,
            _ => 1,
        }
    }
}

/// Attaches a short description of the step that failed.
pub trait Context<T> {
    fn context(self, what: &str) -> Result<T, CliError>;
}

impl<T> Context<T> for rydion_core::Result<T> {
    fn context(self, what: &str) -> Result<T, CliError> {
        self.map_err(|source| CliError::Core {
            context: what.to_string(),
            source,
        })
    }
}
