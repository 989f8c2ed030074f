use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Validation(String),
    #[error(transparent)]
    Model(#[from] commsir::Error),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}: {source}")]
    Json { path: String, source: serde_json::Error },
}

impl CliError {
    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Self::Io { path: path.as_ref().display().to_string(), source }
    }

    /// 2 for anything the user can fix by changing inputs, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        use commsir::Error as E;
        match self {
            Self::Validation(_) | Self::Json { .. } => 2,
            Self::Model(E::Domain(_) | E::Precondition(_) | E::InvalidParameter(_) | E::NoConditionedReplicates(_)) => {
                2
            }
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
