use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid `{field}`: {reason}")]
    Config { field: String, reason: String },

    #[error(transparent)]
    Solver(kgflow::Error),

    #[error("covariance check failed: {0}")]
    Covariance(String),
}

impl CliError {
    pub fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Self::Config {
            field: field.into(),
            reason: reason.into(),
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Config { .. } => 2,
            Self::Solver(_) => 3,
            Self::Covariance(_) => 4,
        }
    }
}

impl From<kgflow::Error> for CliError {
    fn from(e: kgflow::Error) -> Self {
        use kgflow::Error as E;
        match e {
            E::SubThreshold { omega, m0 } => Self::config(
                "omega",
                format!("sub-threshold frequency: omega = {omega} must exceed m = {m0}"),
            ),
            E::InvalidParameter { field, reason } => Self::config(field, reason),
            E::NonMonotoneGrid { name } => Self::config(name, "grid is not monotone"),
            other => Self::Solver(other),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
