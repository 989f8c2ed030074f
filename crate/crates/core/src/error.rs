use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Argument outside the region where the quantity is defined.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    /// A numerical scheme could not reach the required accuracy.
    #[error("numerical instability: {0}")]
    Instability(String),

    #[error("community paths only cover t <= {t_max}, fixed point needs {needed}")]
    InsufficientHorizon { t_max: f64, needed: f64 },

    #[error("empty sample")]
    EmptySample,

    #[error("no replicates satisfy condition {0}")]
    NoConditionedReplicates(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}
