use thiserror::Error;

use crate::klearn::KLearnSolution;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The simplex method exceeded its pivot budget.
    #[error("game solver did not terminate after {iterations} pivots")]
    SolverCycling { iterations: usize },

    /// A computed solution failed its own saddle-point certificate.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// The K-learning program hit its sweep cap; `best` is the best iterate seen.
    #[error("K-learning solver did not converge after {iterations} sweeps (stationarity {stationarity:.3e})")]
    NonConvergence {
        iterations: usize,
        stationarity: f64,
        best: Box<KLearnSolution>,
    },

    #[error("round {round}: {source}")]
    AtRound {
        round: usize,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn at_round(self, round: usize) -> Self {
        Error::AtRound {
            round,
            source: Box::new(self),
        }
    }
}
