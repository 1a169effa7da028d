use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("assortment {0} is not in the feasible family")]
    NotInFamily(String),

    #[error("distribution has zero mean; truncation ratio undefined")]
    ZeroMean,

    #[error("{what} requires {requirement}")]
    Unsupported {
        what: &'static str,
        requirement: &'static str,
    },

    #[error("LP has {vars} variables, above the cap of {cap}")]
    TooLarge { vars: usize, cap: usize },

    #[error("simplex stalled after {0} iterations")]
    IterationLimit(usize),

    #[error("LP is infeasible")]
    Infeasible,

    #[error("LP is unbounded")]
    Unbounded,

    #[error("reachable state space exceeds cap of {cap} states")]
    StateCap { cap: usize },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Numerical failures (solver stalls, state blow-ups) as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::IterationLimit(_)
                | Error::Infeasible
                | Error::Unbounded
                | Error::StateCap { .. }
                | Error::Numerical(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::Invalid(msg.into())
}
