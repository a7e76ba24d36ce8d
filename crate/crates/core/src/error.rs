use thiserror::Error;

/// Errors raised across the crate.
///
/// The variants fall into three families that the command-line front end maps
/// onto exit codes: bad input (`Input`, `Capacity`, `Io`, `Json`, `Csv`),
/// violated preconditions of an algorithm (`Contract`, `NotBoostable`) and
/// solver failures (`Numeric`).
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),

    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("contract violated: {0}")]
    Contract(String),

    #[error(
        "not boostable: guarantee z = {z:.9} is not below the game value V(w) = {value:.9} \
         (margin {margin:.9} must be positive)"
    )]
    NotBoostable { z: f64, value: f64, margin: f64 },

    #[error("numerical breakdown: {0}")]
    Numeric(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }

    pub(crate) fn capacity(msg: impl Into<String>) -> Self {
        Error::Capacity(msg.into())
    }

    /// True for errors caused by a violated algorithmic precondition.
    pub fn is_contract(&self) -> bool {
        matches!(self, Error::Contract(_) | Error::NotBoostable { .. } | Error::Numeric(_))
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
